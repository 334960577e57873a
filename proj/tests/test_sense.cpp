#include "doctest.h"
#include "isgrid/selftest.hpp"
#include "isgrid/sense.hpp"
#include "isgrid/sim.hpp"
#include "oracles.hpp"

using namespace isgrid;

namespace {

std::shared_ptr<const CoilSet> random_coils(const Shape& shape, std::size_t n, std::mt19937_64& rng) {
  auto coils = std::make_shared<CoilSet>();
  for (std::size_t c = 0; c < n; ++c) coils->maps.push_back(random_grid(shape, rng));
  return coils;
}

std::shared_ptr<const KSpaceGridder> random_gridder(const Shape& shape, std::size_t m, std::mt19937_64& rng) {
  return std::make_shared<KSpaceGridder>(make_plan(shape), random_trajectory(shape, m, rng));
}

std::shared_ptr<const ImageGridder> random_warp(const Shape& shape, double amp, std::mt19937_64& rng) {
  return std::make_shared<ImageGridder>(KernelSpec::make(), random_field(shape, amp, rng));
}

CoilData coil_noise(const NonrigidSenseOp& op, std::mt19937_64& rng) {
  CoilData y;
  for (std::size_t c = 0; c < op.coil_count(); ++c) y.push_back(random_vector(op.sample_count(), rng));
  return y;
}

StackedSenseModel random_model(const Shape& shape, std::size_t states, std::mt19937_64& rng) {
  StackedSenseModel model;
  const auto coils = random_coils(shape, 3, rng);
  for (std::size_t j = 0; j < states; ++j) {
    model.states.emplace_back(random_warp(shape, 3.0, rng), coils, random_gridder(shape, 150, rng));
    model.data.push_back(coil_noise(model.states.back(), rng));
  }
  return model;
}

ComplexGrid normal(const StackedSenseModel& m, const ComplexGrid& x) { return stacked_adjoint(m, stacked_forward(m, x)); }

}  // namespace

TEST_CASE("identity warp with a unit coil reduces to k-space gridding") {
  std::mt19937_64 rng(31);
  const Shape shape{32, 32};
  const auto coils = std::make_shared<CoilSet>(CoilSet::unit(shape));
  const auto g = random_gridder(shape, 200, rng);
  const auto x = random_grid(shape, rng);
  const auto y = random_vector(200, rng);

  const NonrigidSenseOp bare(nullptr, coils, g);
  CHECK(nrmse(bare.forward(x)[0], g->inverse(x)) < 1e-13);
  CHECK(nrmse(bare.adjoint({y}).data(), g->forward(y).data()) < 1e-13);

  const NonrigidSenseOp zero(std::make_shared<ImageGridder>(KernelSpec::make(), DisplacementField::zeros(shape)),
                             coils, g);
  CHECK(nrmse(zero.forward(x)[0], g->inverse(x)) < 1e-3);
}

TEST_CASE("zero inputs give zero outputs") {
  std::mt19937_64 rng(32);
  const Shape shape{16, 16};
  const NonrigidSenseOp op(random_warp(shape, 2.0, rng), random_coils(shape, 2, rng), random_gridder(shape, 40, rng));
  for (const auto& block : op.forward(ComplexGrid(shape))) CHECK(norm2(block) == 0.0);
  CHECK(norm2(op.adjoint(CoilData(2, std::vector<Complex>(40))).data()) == 0.0);
}

TEST_CASE("dense 8x8 composition G S T") {
  std::mt19937_64 rng(33);
  const Shape shape{8, 8};
  const auto coils = random_coils(shape, 2, rng);
  const auto g = random_gridder(shape, 20, rng);
  const auto t = random_warp(shape, 2.0, rng);
  const NonrigidSenseOp op(t, coils, g);

  const auto gm = oracle::materialize(64, [&](const std::vector<Complex>& v) { return g->inverse(ComplexGrid(shape, v)); });
  const auto tm =
      oracle::materialize(64, [&](const std::vector<Complex>& v) { return t->forward(ComplexGrid(shape, v)).values(); });

  const auto x = random_grid(shape, rng);
  const auto y = coil_noise(op, rng);
  const auto fx = op.forward(x);
  Eigen::VectorXcd adj_ref = Eigen::VectorXcd::Zero(64);
  for (std::size_t c = 0; c < 2; ++c) {
    const Eigen::MatrixXcd a = gm * oracle::to_eigen(coils->maps[c].values()).asDiagonal() * tm;
    CHECK(oracle::rel_diff(oracle::to_eigen(fx[c]), a * oracle::to_eigen(x.values())) < 1e-10);
    adj_ref += a.adjoint() * oracle::to_eigen(y[c]);
  }
  CHECK(oracle::rel_diff(oracle::to_eigen(op.adjoint(y).values()), adj_ref) < 1e-10);
}

TEST_CASE("sense operator is adjoint") {
  std::mt19937_64 rng(34);
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    const NonrigidSenseOp op(random_warp(shape, 3.0, rng), random_coils(shape, 3, rng), random_gridder(shape, 200, rng));
    const auto x = random_grid(shape, rng);
    const auto y = coil_noise(op, rng);
    const auto ax = flatten(std::vector<CoilData>{op.forward(x)});
    const auto fy = flatten(std::vector<CoilData>{y});
    const auto ahy = op.adjoint(y);
    CHECK(adjoint_discrepancy(inner(ax, fy), inner(x.data(), ahy.data()), norm2(ax), norm2(fy)) < 1e-12);
  }
}

TEST_CASE("single-state stack equals the bare operator bit for bit") {
  std::mt19937_64 rng(35);
  const Shape shape{16, 16};
  const auto model = random_model(shape, 1, rng);
  const auto x = random_grid(shape, rng);
  CHECK(stacked_forward(model, x)[0] == model.states[0].forward(x));
  CHECK(stacked_adjoint(model, model.data) == model.states[0].adjoint(model.data[0]));
}

TEST_CASE("three-state stack is adjoint") {
  std::mt19937_64 rng(36);
  const Shape shape{32, 32};
  const auto model = random_model(shape, 3, rng);
  const auto x = random_grid(shape, rng);
  const auto ax = flatten(stacked_forward(model, x));
  const auto y = flatten(model.data);
  const auto ahy = stacked_adjoint(model, model.data);
  CHECK(adjoint_discrepancy(inner(ax, y), inner(x.data(), ahy.data()), norm2(ax), norm2(y)) < 1e-12);
  CHECK(ax.size() == model.total_samples());
  CHECK(flatten(unflatten(model, y)) == y);
}

TEST_CASE("duplicating a state doubles its normal term") {
  std::mt19937_64 rng(37);
  const Shape shape{16, 16};
  auto model = random_model(shape, 2, rng);
  StackedSenseModel single{{model.states[1]}, {model.data[1]}};
  StackedSenseModel base{{model.states[0]}, {model.data[0]}};
  model.states.push_back(model.states[1]);
  model.data.push_back(model.data[1]);

  const auto x = random_grid(shape, rng);
  const auto full = normal(model, x);
  const auto b = normal(base, x);
  const auto s = normal(single, x);
  std::vector<Complex> got(full.size()), want(full.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    got[i] = full[i] - b[i];
    want[i] = 2.0 * s[i];
  }
  CHECK(nrmse(got, want) < 1e-12);
}

TEST_CASE("stacked normal operator is self-adjoint and positive semidefinite") {
  std::mt19937_64 rng(38);
  const Shape shape{32, 32};
  const auto model = random_model(shape, 3, rng);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = random_grid(shape, rng), y = random_grid(shape, rng);
    const auto nx = normal(model, x), ny = normal(model, y);
    CHECK(std::abs(inner(nx.data(), y.data()) - inner(x.data(), ny.data())) /
              (norm2(nx.data()) * norm2(y.data())) <
          1e-12);
    const double nxx = norm2(x.data());
    CHECK(inner(x.data(), nx.data()).real() >= -1e-12 * nxx * nxx);
  }
}

TEST_CASE("permuting states permutes the forward blocks only") {
  std::mt19937_64 rng(39);
  const Shape shape{16, 16};
  const auto model = random_model(shape, 3, rng);
  StackedSenseModel perm{{model.states[2], model.states[0], model.states[1]},
                         {model.data[2], model.data[0], model.data[1]}};
  const auto x = random_grid(shape, rng);
  const auto a = stacked_forward(model, x);
  const auto b = stacked_forward(perm, x);
  CHECK(b[0] == a[2]);
  CHECK(b[1] == a[0]);
  CHECK(b[2] == a[1]);
  CHECK(nrmse(stacked_adjoint(perm, perm.data).data(), stacked_adjoint(model, model.data).data()) < 1e-13);
}

TEST_CASE("model validation") {
  std::mt19937_64 rng(40);
  const Shape shape{16, 16};
  auto model = random_model(shape, 2, rng);
  model.data.pop_back();
  CHECK_THROWS(model.validate());
  CHECK_THROWS(stacked_adjoint(model, model.data));

  auto short_block = random_model(shape, 1, rng);
  short_block.data[0][0].pop_back();
  CHECK_THROWS(short_block.validate());

  CoilSet bad;
  bad.maps.push_back(ComplexGrid({16, 16}));
  bad.maps.push_back(ComplexGrid({8, 8}));
  CHECK_THROWS(bad.validate());
  CHECK_THROWS(NonrigidSenseOp(nullptr, std::make_shared<CoilSet>(CoilSet::unit({8, 8})), random_gridder(shape, 10, rng)));
}
