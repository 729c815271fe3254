#include "doctest.h"

#include "support/gradcheck.hpp"
#include "support/model_fixtures.hpp"
#include "support/temp_dir.hpp"
#include "t2gnn/error.hpp"
#include "t2gnn/models.hpp"
#include "t2gnn/ppr.hpp"

#include <memory>

using namespace t2gnn;
using t2gnn::testing::check_parameter_gradients;
using t2gnn::testing::random_matrix;
using t2gnn::testing::TempDir;
using namespace t2gnn::testing;
using t2gnn::testing::weighted_sum;

namespace {

double full_model_check(Model& model, const GraphInput& in, std::uint64_t seed) {
  auto result = model_gradient_check(model, in, seed);
  CHECK(result.checked > 0);
  return result.max_rel_error;
}

OutputValues run(Model& m, const GraphInput& in, bool training = false, std::uint64_t seed = 1) {
  Tape t;
  Rng rng(seed);
  return values_of(m.forward(t, in, training, rng));
}

}  // namespace

TEST_CASE("impute_features: all observed, none observed, mixed") {
  DenseMatrix x(2, 2);
  x << 1, 2, 3, 4;
  DenseMatrix th(2, 2);
  th << -1, -2, -3, -4;
  BoolMatrix all = BoolMatrix::Constant(2, 2, true), none = BoolMatrix::Constant(2, 2, false);
  {
    Tape t;
    Var theta = t.variable(th);
    Var out = impute_features(x, all, theta);
    CHECK(out.value() == x);
    t.backward(sum(out));
    CHECK(theta.grad().isZero());
  }
  {
    Tape t;
    CHECK(impute_features(x, none, t.variable(th)).value() == th);
  }
  BoolMatrix mixed(2, 2);
  mixed << true, false, false, true;
  Tape t;
  Var theta = t.variable(th);
  Var out = impute_features(x, mixed, theta);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(out.value()(i, j) == (mixed(i, j) ? x(i, j) : th(i, j)));
  t.backward(sum(out));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(theta.grad()(i, j) == (mixed(i, j) ? 0.0 : 1.0));
}

TEST_CASE("positional_encoding: zeros, distinct rows, gather oracle") {
  Tape t;
  CHECK(positional_encoding(t.constant(DenseMatrix::Zero(4, 3)), t.constant(DenseMatrix::Zero(1, 3)))
            .value()
            .isZero());
  Rng rng(4);
  DenseMatrix w = random_matrix(rng, 4, 3), b = random_matrix(rng, 1, 3);
  DenseMatrix pe = positional_encoding(t.constant(w), t.constant(b)).value();
  for (int v = 0; v < 4; ++v) {
    // W·onehot(v) + b with W stored transposed as the table
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(4);
    onehot(v) = 1.0;
    Eigen::VectorXd expect = w.transpose() * onehot + b.transpose();
    CHECK((pe.row(v).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
    for (int u = 0; u < v; ++u) CHECK(pe.row(u) != pe.row(v));
  }
}

TEST_CASE("gcn_layer: edgeless graph, K2 symmetry, dense oracle") {
  Rng rng(8);
  Tape t;
  DenseMatrix h = random_matrix(rng, 3, 4), w = random_matrix(rng, 4, 2);
  SparseRowMatrix edgeless(3, 3);
  DenseMatrix got = gcn_layer(gcn_normalize(edgeless), t.constant(h), t.constant(w), true).value();
  CHECK((got - (h * w).cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-15);

  SparseRowMatrix k2 = SparseRowMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  DenseMatrix eye = DenseMatrix::Identity(2, 2);
  DenseMatrix sym = gcn_layer(gcn_normalize(k2), t.constant(eye), t.constant(eye), false).value();
  CHECK(sym.row(0).sum() == doctest::Approx(sym.row(1).sum()));
  CHECK(sym(0, 0) == doctest::Approx(sym(1, 1)));

  DenseMatrix a = DenseMatrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 0.5;
  a(2, 3) = a(3, 2) = 2.0;
  DenseMatrix hat = a + DenseMatrix::Identity(4, 4);
  Eigen::VectorXd dinv = hat.rowwise().sum().cwiseSqrt().cwiseInverse();
  DenseMatrix norm = dinv.asDiagonal() * hat * dinv.asDiagonal();
  DenseMatrix h4 = random_matrix(rng, 4, 5), w4 = random_matrix(rng, 5, 3);
  DenseMatrix oracle = (norm * h4 * w4).cwiseMax(0.0);
  DenseMatrix out = gcn_layer(gcn_normalize(SparseRowMatrix::from_dense(a)), t.constant(h4), t.constant(w4), true)
                        .value();
  CHECK((out - oracle).cwiseAbs().maxCoeff() < 1e-12);
  // widening weight takes the other association
  DenseMatrix w_wide = random_matrix(rng, 5, 9);
  DenseMatrix wide = gcn_layer(gcn_normalize(SparseRowMatrix::from_dense(a)), t.constant(h4), t.constant(w_wide), false)
                         .value();
  CHECK((wide - norm * h4 * w_wide).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("feature teacher: zero weights give broadcast bias, default width 512") {
  Rng rng(1);
  IncompleteGraph g = small_graph(rng, 6, 4, 3, 0.4, 0.3);
  GraphInput in = GraphInput::build(g);
  ModelConfig cfg;
  FeatureTeacher ft(6, 4, 3, cfg, rng);
  CHECK(run(ft, in).intermediate.cols() == 512);
  for (const char* name : {"w1", "b1", "w2"}) ft.parameter(name).value().setZero();
  ft.parameter("b2").value() << 0.1, -0.2, 0.3;
  OutputValues out = run(ft, in);
  for (int i = 0; i < 6; ++i) CHECK(out.logits.row(i) == ft.parameter("b2").value());
}

TEST_CASE("feature teacher: theta gradient only where features are masked") {
  Rng rng(2);
  for (double rate : {0.0, 0.4}) {
    IncompleteGraph g = small_graph(rng, 6, 4, 3, 0.4, rate);
    GraphInput in = GraphInput::build(g);
    FeatureTeacher ft(6, 4, 3, small_config(), rng);
    ft.parameter("theta").zero_grad();
    Tape t;
    Rng drop(3);
    ModelOutput out = ft.forward(t, in, false, drop);
    std::vector<int> idx{0, 1, 2, 3, 4, 5};
    t.backward(cross_entropy(log_softmax_rows(out.logits), g.labels, idx));
    const DenseMatrix& grad = ft.parameter("theta").grad();
    for (Eigen::Index i = 0; i < grad.rows(); ++i)
      for (Eigen::Index j = 0; j < grad.cols(); ++j)
        if (g.feature_observed(i, j)) CHECK(grad(i, j) == 0.0);
    if (rate == 0.0) CHECK(grad.isZero());
    else CHECK_FALSE(grad.isZero());
  }
}

TEST_CASE("teachers ignore the other modality") {
  Rng rng(5);
  IncompleteGraph g = small_graph(rng, 8, 5, 2, 0.4, 0.3);
  IncompleteGraph rewired = g;
  rewired.adjacency = SparseRowMatrix::from_triplets(8, 8, {{0, 7, 1.0}, {7, 0, 1.0}});
  IncompleteGraph refeatured = g;
  refeatured.features = random_matrix(rng, 8, 5);
  ModelConfig cfg = small_config();

  FeatureTeacher ft(8, 5, 2, cfg, rng);
  OutputValues a = run(ft, GraphInput::build(g), true, 9), b = run(ft, GraphInput::build(rewired), true, 9);
  CHECK(a.logits == b.logits);
  CHECK(a.intermediate == b.intermediate);

  StructureTeacher st(8, 5, 2, cfg, rng);
  OutputValues c = run(st, GraphInput::build(g), true, 9), d = run(st, GraphInput::build(refeatured), true, 9);
  CHECK(c.logits == d.logits);
  CHECK(c.intermediate == d.intermediate);
  CHECK(st.parameter("pe_table").value().cols() == 5);
}

TEST_CASE("structure teacher: zero PE gives zero output; zero PPR reduces to plain GCN over PE") {
  Rng rng(6);
  IncompleteGraph g = small_graph(rng, 6, 3, 2, 0.5, 0.0);
  StructureTeacher st(6, 3, 2, small_config(), rng);
  GraphInput plain = GraphInput::build(g);
  GraphInput enhanced = GraphInput::build(g, enhance_adjacency(g.adjacency, SparseRowMatrix(6, 6)));
  OutputValues a = run(st, plain), b = run(st, enhanced);
  CHECK(a.logits == b.logits);

  st.parameter("pe_table").value().setZero();
  st.parameter("pe_bias").value().setZero();
  CHECK(run(st, plain).logits.isZero());
}

TEST_CASE("students: degenerate inputs") {
  Rng rng(7);
  ModelConfig cfg = small_config();
  SUBCASE("GAT on a single node attends to itself") {
    IncompleteGraph g = small_graph(rng, 1, 3, 1, 0.0, 0.0);
    GraphInput in = GraphInput::build(g);
    CHECK(in.attention_pattern.at(0, 0) == 1.0);
    SparseRowMatrix alpha = attention_coefficients(in.attention_pattern, random_matrix(rng, 1, 3),
                                                   random_matrix(rng, 3, 1), random_matrix(rng, 3, 1));
    CHECK(alpha.at(0, 0) == 1.0);
    Student gat(Backbone::GAT, 3, 1, cfg, rng);
    OutputValues out = run(gat, in);
    DenseMatrix wh = in.features * gat.parameter("w1").value();
    DenseMatrix hidden = wh.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
    CHECK((out.intermediate - hidden).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("GraphSAGE mean over no neighbors is zero") {
    IncompleteGraph g = small_graph(rng, 4, 3, 2, 0.0, 0.0);
    GraphInput in = GraphInput::build(g);
    Student sage(Backbone::GraphSAGE, 3, 2, cfg, rng);
    OutputValues out = run(sage, in);
    const DenseMatrix& w1 = sage.parameter("w1").value();
    DenseMatrix expect = (in.features * w1.topRows(3)).cwiseMax(0.0);
    CHECK((out.intermediate - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("APPNP with alpha 1 is the MLP predictor") {
    IncompleteGraph g = small_graph(rng, 6, 3, 2, 0.5, 0.0);
    GraphInput in = GraphInput::build(g);
    ModelConfig c1 = cfg;
    c1.appnp_alpha = 1.0;
    Student appnp(Backbone::APPNP, 3, 2, c1, rng);
    OutputValues out = run(appnp, in);
    DenseMatrix r = ((in.features * appnp.parameter("w1").value()).rowwise() +
                     appnp.parameter("b1").value().row(0))
                        .cwiseMax(0.0);
    DenseMatrix z = (r * appnp.parameter("w2").value()).rowwise() + appnp.parameter("b2").value().row(0);
    CHECK((out.logits - z).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("GCN on an edgeless graph is a per-node MLP") {
    IncompleteGraph g = small_graph(rng, 5, 3, 2, 0.0, 0.3);
    GraphInput in = GraphInput::build(g);
    Student gcn(Backbone::GCN, 3, 2, cfg, rng);
    OutputValues out = run(gcn, in);
    DenseMatrix r = (in.features * gcn.parameter("w1").value()).cwiseMax(0.0);
    CHECK((out.intermediate - r).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((out.logits - r * gcn.parameter("w2").value()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("students: unknown backbone, names round-trip") {
  CHECK_THROWS_AS(parse_backbone("mlp"), ConfigError);
  for (Backbone b : {Backbone::GCN, Backbone::GAT, Backbone::GraphSAGE, Backbone::APPNP})
    CHECK(parse_backbone(backbone_name(b)) == b);
  CHECK(parse_backbone("GraphSAGE") == Backbone::GraphSAGE);
}

TEST_CASE("students: placeholders are read as zero") {
  Rng rng(12);
  IncompleteGraph g = small_graph(rng, 6, 4, 2, 0.5, 0.5);
  IncompleteGraph dirty = g;
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (!g.feature_observed(i, j)) dirty.features(i, j) = 99.0;
  Student s(Backbone::GCN, 4, 2, small_config(), rng);
  CHECK(run(s, GraphInput::build(g)).logits == run(s, GraphInput::build(dirty)).logits);
}

TEST_CASE("forward passes are deterministic given the dropout seed") {
  Rng rng(13);
  IncompleteGraph g = small_graph(rng, 8, 4, 2, 0.4, 0.3);
  GraphInput in = GraphInput::build(g);
  for (Backbone b : {Backbone::GCN, Backbone::GAT, Backbone::GraphSAGE, Backbone::APPNP}) {
    Student s(b, 4, 2, small_config(), rng);
    CHECK(run(s, in, true, 77).logits == run(s, in, true, 77).logits);
    CHECK(run(s, in, true, 77).logits != run(s, in, true, 78).logits);
  }
}

TEST_CASE("full-model gradient checks on graphs with at most 8 nodes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    Rng rng(100 + seed);
    const int n = 4 + static_cast<int>(seed % 5), d = 4, c = 3;
    IncompleteGraph g = small_graph(rng, n, d, c, 0.4, 0.3);
    GraphInput in = GraphInput::build(g);
    GraphInput enhanced = GraphInput::build(g, build_enhanced_adjacency(g.adjacency, PprConfig{0.15, 1e-4, 3}));
    ModelConfig cfg = small_config();
    ModelConfig wide = cfg;
    wide.feature_teacher_hidden = 512;

    FeatureTeacher ft(n, d, c, wide, rng);
    CHECK(full_model_check(ft, in, seed) < 1e-4);
    StructureTeacher st(n, d, c, cfg, rng);
    CHECK(full_model_check(st, enhanced, seed) < 1e-4);
    SingleTeacher single(n, d, c, cfg, rng);
    CHECK(full_model_check(single, enhanced, seed) < 1e-4);
    for (Backbone b : {Backbone::GCN, Backbone::GAT, Backbone::GraphSAGE, Backbone::APPNP}) {
      CAPTURE(backbone_name(b));
      Student s(b, d, c, cfg, rng);
      CHECK(full_model_check(s, in, seed) < 1e-4);
    }
  }
}

TEST_CASE("checkpoints: round trip and mismatch errors") {
  Rng rng(21);
  ModelConfig cfg = small_config();
  Student a(Backbone::GAT, 4, 3, cfg, rng), b(Backbone::GAT, 4, 3, cfg, rng);
  TempDir dir;
  auto path = dir.path() / "ckpt.json";
  save_checkpoint(a, path);
  load_checkpoint(b, path);
  CHECK(a.snapshot() == b.snapshot());

  Student other(Backbone::GCN, 4, 3, cfg, rng);
  CHECK_THROWS_AS(load_checkpoint(other, path), FormatError);
  Student narrower(Backbone::GAT, 5, 3, cfg, rng);
  CHECK_THROWS_AS(load_checkpoint(narrower, path), FormatError);
  CHECK_THROWS_AS(load_checkpoint(b, dir.path() / "missing.json"), ConfigError);
  dir.write("bad.json", "{not json");
  CHECK_THROWS_AS(load_checkpoint(b, dir.path() / "bad.json"), FormatError);
}

TEST_CASE("snapshot and restore") {
  Rng rng(22);
  FeatureTeacher ft(5, 3, 2, small_config(), rng);
  auto snap = ft.snapshot();
  ft.parameter("w1").value().setConstant(3.0);
  ft.restore(snap);
  CHECK(ft.snapshot() == snap);
  CHECK_THROWS_AS(ft.parameter("nope"), ConfigError);
}
