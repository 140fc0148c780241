#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oldroyd/operators.hpp"
#include "oldroyd/snapshot.hpp"
#include "oracles.hpp"

using namespace oldroyd;
using Catch::Approx;

namespace {

SpectralField random_field(const PeriodicGrid& g, Rank rank, std::uint64_t seed) {
  const auto x = oracle::random_samples(static_cast<std::size_t>(component_count(rank, g.dim())) * g.size(), seed);
  auto f = forward_transform(g, rank, x);
  for (int c = 0; c < f.components(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m)
      if (g.nyquist(m)) f(c, m) = 0.0;
  return f;
}

std::vector<double> sample(const PeriodicGrid& g, auto&& fn) {
  std::vector<double> x(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) x[static_cast<std::size_t>(i) * g.n() + j] = fn(g.coordinate(i), g.coordinate(j));
  return x;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) w = std::max(w, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return w;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PeriodicGrid(1, 16), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid(2, 7), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid(2, 6), ConfigError);
  PeriodicGrid g(2, 8);
  CHECK(g.size() == 64);
  // Nyquist carries +n/2
  std::array<int, 2> k{4, 0};
  CHECK(g.xi(0)[g.index_of(k)] == 4.0);
  CHECK(g.nyquist(g.index_of(k)));
  CHECK_FALSE(g.kept(g.index_of(k)));
}

TEST_CASE("lattice is symmetric away from Nyquist") {
  PeriodicGrid g(3, 8);
  for (std::size_t m = 0; m < g.size(); ++m) {
    if (g.nyquist(m)) continue;
    const auto c = g.conjugate_index(m);
    for (int a = 0; a < 3; ++a) CHECK(g.xi(a)[c] == -g.xi(a)[m]);
  }
}

TEST_CASE("forward transform matches a direct DFT") {
  for (int dim : {2, 3}) {
    PeriodicGrid g(dim, 8);
    const auto x = oracle::random_samples(g.size(), 11 + dim);
    const auto f = forward_transform(g, Rank::scalar, x);
    const auto ref = oracle::naive_dft(x, dim, 8);
    double err = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) err = std::max(err, std::abs(f(0, m) - ref[m]));
    CHECK(err < 1e-14);
  }
}

TEST_CASE("transform roundtrip and conjugate symmetry") {
  for (int dim : {2, 3}) {
    PeriodicGrid g(dim, dim == 2 ? 32 : 16);
    const auto x = oracle::random_samples(g.size() * dim, 7);
    const auto f = forward_transform(g, Rank::vector, x);
    const auto back = inverse_transform(f);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - x[i]));
    CHECK(err <= 1e-12 * max_abs(std::span<const double>(x)));
    CHECK(conjugate_symmetry_defect(f) < 1e-15);
  }
  PeriodicGrid g(2, 16);
  std::vector<double> wrong(g.size() + 1);
  CHECK_THROWS_AS(forward_transform(g, Rank::scalar, wrong), ConfigError);
}

TEST_CASE("constant and single-mode transforms") {
  PeriodicGrid g(2, 16);
  const auto c = forward_transform(g, Rank::scalar, sample(g, [](double, double) { return 2.5; }));
  CHECK(c(0, 0).real() == Approx(2.5).margin(1e-15));
  for (std::size_t m = 1; m < g.size(); ++m) CHECK(std::abs(c(0, m)) < 1e-15);

  const auto f = forward_transform(g, Rank::scalar, sample(g, [](double x1, double) { return std::cos(x1); }));
  std::array<int, 2> p{1, 0}, q{-1, 0};
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double expect = (m == g.index_of(p) || m == g.index_of(q)) ? 0.5 : 0.0;
    CHECK(std::abs(f(0, m) - expect) < 1e-15);
  }
}

TEST_CASE("grad of cos x1") {
  PeriodicGrid g(2, 16);
  const auto f = forward_transform(g, Rank::scalar, sample(g, [](double x1, double) { return std::cos(x1); }));
  const auto gf = inverse_transform(grad(f));
  const auto expect = sample(g, [](double x1, double) { return -std::sin(x1); });
  double err = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    err = std::max(err, std::abs(gf[m] - expect[m]));
    err = std::max(err, std::abs(gf[g.size() + m]));
  }
  CHECK(err < 1e-14);
}

TEST_CASE("operator compositions") {
  PeriodicGrid g(2, 32);
  const auto f = random_field(g, Rank::scalar, 3);
  CHECK(max_diff(div(grad(f)), laplacian(f)) <= 1e-12);

  auto mean_free = f;
  mean_free(0, 0) = 0.0;
  CHECK(max_diff(laplacian(inv_laplacian(f)), mean_free) <= 1e-12);
  CHECK(max_diff(lambda_power(lambda_power(mean_free, 1.0), -1.0), mean_free) <= 1e-12);
  CHECK(max_diff(lambda_power(mean_free, 0.0), mean_free) == 0.0);

  SpectralField c(g, Rank::scalar);
  c(0, 0) = 3.0;
  CHECK(max_abs(laplacian(c).coeffs()) == 0.0);
  CHECK(max_abs(inv_laplacian(c).coeffs()) == 0.0);

  SpectralField single(g, Rank::scalar);
  std::array<int, 2> k{2, 0};
  single(0, g.index_of(k)) = {1.5, -0.5};
  CHECK(std::abs(inv_laplacian(single)(0, g.index_of(k)) - cplx(-1.5 / 4, 0.5 / 4)) < 1e-16);
  CHECK(std::abs(lambda_power(single, 1.0)(0, g.index_of(k)) - cplx(3.0, -1.0)) < 1e-16);
}

TEST_CASE("rank mismatches are configuration errors") {
  PeriodicGrid g(2, 16);
  SpectralField s(g, Rank::scalar), v(g, Rank::vector), t(g, Rank::tensor);
  CHECK_THROWS_AS(grad(t), ConfigError);
  CHECK_THROWS_AS(div(s), ConfigError);
  CHECK_THROWS_AS(div_tensor(v), ConfigError);
  CHECK_THROWS_AS(leray_project(s), ConfigError);
  CHECK_THROWS_AS(helmholtz_tensor(v), ConfigError);
  CHECK_THROWS_AS(s += v, ConfigError);
}

TEST_CASE("div_tensor contracts the second index") {
  PeriodicGrid g(2, 16);
  // tau = [[0, sin x2], [0, 0]]: (div tau)_1 = d_2 tau_12 = cos x2, (div tau)_2 = 0
  std::vector<double> x(4 * g.size(), 0.0);
  const auto s = sample(g, [](double, double x2) { return std::sin(x2); });
  std::copy(s.begin(), s.end(), x.begin() + static_cast<std::ptrdiff_t>(g.size()));
  const auto d = inverse_transform(div_tensor(forward_transform(g, Rank::tensor, x)));
  const auto expect = sample(g, [](double, double x2) { return std::cos(x2); });
  double err = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    err = std::max(err, std::abs(d[m] - expect[m]));
    err = std::max(err, std::abs(d[g.size() + m]));
  }
  CHECK(err < 1e-14);
}

TEST_CASE("Leray projection") {
  PeriodicGrid g(2, 32);
  auto phi = random_field(g, Rank::scalar, 5);
  phi(0, 0) = 0.0;
  CHECK(max_abs(leray_project(grad(phi)).coeffs()) <= 1e-12);

  const auto w = leray_project(random_field(g, Rank::vector, 6));
  CHECK(w.flags().divergence_free);
  CHECK(divergence_residual(w) <= 1e-12);
  CHECK(max_diff(leray_project(w), w) <= 1e-13);
  CHECK(max_diff(leray_project(grad(phi) + w), w) <= 1e-12);

  // idempotence per mode, mean untouched
  const auto v = random_field(g, Rank::vector, 8);
  const auto pv = leray_project(v);
  CHECK(max_diff(leray_project(pv), pv) <= 1e-13 * max_abs(v.coeffs()));
  CHECK(pv(0, 0) == v(0, 0));
  CHECK(pv(1, 0) == v(1, 0));
  CHECK(conjugate_symmetry_defect(pv) <= 1e-15);
}

TEST_CASE("Helmholtz split of tensors") {
  for (int dim : {2, 3}) {
    PeriodicGrid g(dim, dim == 2 ? 32 : 12);
    auto tau = random_field(g, Rank::tensor, 9);
    // symmetrize
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j)
        for (std::size_t m = 0; m < g.size(); ++m) {
          const cplx avg = 0.5 * (tau(i * dim + j, m) + tau(j * dim + i, m));
          tau(i * dim + j, m) = tau(j * dim + i, m) = avg;
        }
    const auto [p, q] = helmholtz_tensor(tau);
    CHECK(max_diff(p + q, tau) <= 0x1p-52 * max_abs(tau.coeffs()));
    const auto dp = div_tensor(p);
    CHECK(max_abs(dp.coeffs()) <= 1e-12 * l2_norm(tau));
    CHECK(max_diff(div_tensor(q), div_tensor(tau)) <= 1e-12);
    const auto [pp, pq] = helmholtz_tensor(p);
    CHECK(max_diff(pp, p) <= 1e-13 * max_abs(tau.coeffs()));
    const auto [qp, qq] = helmholtz_tensor(q);
    CHECK(max_diff(qq, q) <= 1e-13 * max_abs(tau.coeffs()));
    CHECK(max_abs(qp.coeffs()) <= 1e-13 * max_abs(tau.coeffs()));
  }
}

TEST_CASE("Helmholtz limits: gradient rows and divergence-free rows") {
  PeriodicGrid g(2, 16);
  auto a = random_field(g, Rank::scalar, 21);
  auto b = random_field(g, Rank::scalar, 22);
  a(0, 0) = b(0, 0) = 0.0;
  const auto ga = grad(a);
  const auto gb = grad(b);
  SpectralField tau(g, Rank::tensor);
  for (std::size_t m = 0; m < g.size(); ++m) {
    tau(0, m) = ga(0, m);
    tau(1, m) = ga(1, m);
    tau(2, m) = gb(0, m);
    tau(3, m) = gb(1, m);
  }
  auto [p, q] = helmholtz_tensor(tau);
  CHECK(max_abs(p.coeffs()) <= 1e-13);
  CHECK(max_diff(q, tau) <= 1e-13);

  const auto w1 = leray_project(random_field(g, Rank::vector, 23));
  const auto w2 = leray_project(random_field(g, Rank::vector, 24));
  for (std::size_t m = 0; m < g.size(); ++m) {
    tau(0, m) = w1(0, m);
    tau(1, m) = w1(1, m);
    tau(2, m) = w2(0, m);
    tau(3, m) = w2(1, m);
  }
  auto [p2, q2] = helmholtz_tensor(tau);
  CHECK(max_diff(p2, tau) <= 1e-13);
  CHECK(max_abs(q2.coeffs()) <= 1e-13);
}

TEST_CASE("grad/div adjointness") {
  PeriodicGrid g(2, 32);
  auto f = random_field(g, Rank::scalar, 30);
  f(0, 0) = 0.0;
  const auto v = random_field(g, Rank::vector, 31);
  const double lhs = inner(grad(f), v);
  const double rhs = -inner(f, div(v));
  CHECK(std::abs(lhs - rhs) <= 1e-11 * std::abs(lhs));
}

TEST_CASE("real fields stay real") {
  PeriodicGrid g(2, 32);
  const auto u = random_field(g, Rank::vector, 40);
  for (const auto& out : {grad(u), laplacian(grad(u)), helmholtz_tensor(grad(u)).P}) {
    const auto z = inverse_transform_complex(out);
    double im = 0.0;
    for (auto v : z) im = std::max(im, std::abs(v.imag()));
    CHECK(im <= 1e-12);
  }
}

TEST_CASE("odd operators drop the Nyquist component") {
  PeriodicGrid g(2, 16);
  const auto f = forward_transform(g, Rank::scalar, oracle::random_samples(g.size(), 41));
  const auto z = inverse_transform_complex(grad(f));
  double im = 0.0;
  for (auto v : z) im = std::max(im, std::abs(v.imag()));
  CHECK(im <= 1e-12);
  const auto pv = leray_project(forward_transform(g, Rank::vector, oracle::random_samples(2 * g.size(), 42)));
  CHECK(conjugate_symmetry_defect(pv) <= 1e-15);
  CHECK(max_abs(div(pv).coeffs()) <= 1e-14);
}

TEST_CASE("dealias mask") {
  PeriodicGrid g(2, 24);
  const auto f = random_field(g, Rank::scalar, 50);
  const auto once = dealias(f);
  CHECK(max_diff(dealias(once), once) == 0.0);
  CHECK(max_diff(dealias(once), once) == 0.0);
  SpectralField nyq(g, Rank::scalar);
  std::array<int, 2> k{12, 3};
  nyq(0, g.index_of(k)) = 1.0;
  CHECK(max_abs(dealias(nyq).coeffs()) == 0.0);
  SpectralField low(g, Rank::scalar);
  std::array<int, 2> k2{8, -8};
  low(0, g.index_of(k2)) = 1.0;
  CHECK(max_diff(dealias(low), low) == 0.0);
}

TEST_CASE("snapshot roundtrip and corruption") {
  PeriodicGrid g(2, 16);
  auto tau = random_field(g, Rank::tensor, 60);
  tau.flags().symmetric = true;
  std::stringstream ss;
  write_snapshot(ss, tau);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "OLDB");
  CHECK(bytes.size() == 24 + 16 * tau.coeffs().size());
  // header fields are little-endian u32
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);
  CHECK(static_cast<unsigned char>(bytes[12]) == 16);
  CHECK(static_cast<unsigned char>(bytes[16]) == 2);
  CHECK(static_cast<unsigned char>(bytes[20]) == 1);

  std::stringstream in(bytes);
  const auto back = read_snapshot(in);
  CHECK(back.rank() == Rank::tensor);
  CHECK(back.flags() == tau.flags());
  CHECK(max_diff(back, tau) == 0.0);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_snapshot(truncated), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream badmagic(bad);
  CHECK_THROWS_AS(read_snapshot(badmagic), IoError);
  std::string badgrid = bytes;
  badgrid[12] = 7;
  std::stringstream badg(badgrid);
  CHECK_THROWS_AS(read_snapshot(badg), IoError);
}
