#include <cmath>
#include <doctest.h>

#include "seqvid/error.hpp"
#include "seqvid/tensor.hpp"

using namespace seqvid;

namespace {

// Naive triple-loop reference, scalar accumulator, k ascending.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        sum += a.at(i, kk) * b.at(kk, j);
      }
      c.at(i, j) = sum;
    }
  }
  return c;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("matmul identity") {
  const Tensor eye({2, 2}, {1, 0, 0, 1});
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor c = matmul(eye, a);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c[i] == a[i]);
}

TEST_CASE("matmul 1x2 by 2x1") {
  const Tensor a({1, 2}, {1, 2});
  const Tensor b({2, 1}, {3, 4});
  const Tensor c = matmul(a, b);
  CHECK(c.size() == 1);
  CHECK(c[0] == 11.0);
}

TEST_CASE("matmul matches the naive triple loop bit for bit") {
  Rng rng(42);
  const Tensor a = random_tensor({5, 7}, rng);
  const Tensor b = random_tensor({7, 3}, rng);
  const Tensor got = matmul(a, b);
  const Tensor want = matmul_oracle(a, b);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("matmul shape mismatch") {
  const Tensor a({2, 3});
  const Tensor b({2, 3});
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
  CHECK_THROWS_AS(matmul(a, Tensor({6})), DimensionError);
}

TEST_CASE("matmul associativity within 1e-9 relative") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor({4, 4}, rng);
    const Tensor b = random_tensor({4, 4}, rng);
    const Tensor c = random_tensor({4, 4}, rng);
    const Tensor left = matmul(matmul(a, b), c);
    const Tensor right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      const double denom = std::max(1e-12, std::abs(left[i]));
      CHECK(std::abs(left[i] - right[i]) / denom < 1e-9);
    }
  }
}

TEST_CASE("matmul rejects non-finite results") {
  const Tensor a({1, 1}, {1e308});
  const Tensor b({1, 1}, {1e308});
  CHECK_THROWS_AS(matmul(a, b), NumericError);
}

TEST_CASE("map scalar functions") {
  CHECK(map(Tensor({1}, {0.0}), ScalarFn::Sigmoid)[0] == 0.5);
  CHECK(map(Tensor({1}, {0.0}), ScalarFn::Tanh)[0] == 0.0);
  // sigmoid(ln 3) = 1/(1 + 1/3) = 3/4
  const double y = map(Tensor({1}, {std::log(3.0)}), ScalarFn::Sigmoid)[0];
  CHECK(y == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("derivative-from-output maps agree with closed forms") {
  Rng rng(3);
  const Tensor x = random_tensor({64}, rng);
  const Tensor th = map(x, ScalarFn::Tanh);
  const Tensor dth = map(th, ScalarFn::DTanhFromY);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double want = 1.0 - std::tanh(x[i]) * std::tanh(x[i]);
    CHECK(std::abs(dth[i] - want) < 1e-12);
  }
  const Tensor sg = map(x, ScalarFn::Sigmoid);
  const Tensor dsg = map(sg, ScalarFn::DSigmoidFromY);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-x[i]));
    CHECK(std::abs(dsg[i] - s * (1.0 - s)) < 1e-12);
  }
}

TEST_CASE("uniform_init bounds") {
  Rng rng(1);
  const Tensor a = uniform_init({100}, 4, rng);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] >= -0.5);
    CHECK(a[i] <= 0.5);
  }
  const Tensor b = uniform_init({100}, 1, rng);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(std::abs(b[i]) <= 1.0);
  }
  CHECK_THROWS_AS(uniform_init({4}, 0, rng), ParameterError);
}

TEST_CASE("uniform_init moments at fan_in 4") {
  Rng rng(99);
  const std::size_t n = 1000000;
  const Tensor a = uniform_init({n}, 4, rng);
  const double mean = reduce(a, Reduction::Sum) / static_cast<double>(n);
  CHECK(std::abs(mean) < 0.002);
  // Var(U[-1/2, 1/2]) = 1/12
  const double var = reduce(a, Reduction::Variance);
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("uniform_init is pure given the rng state") {
  Rng a(1234), b(1234);
  const Tensor ta = uniform_init({64}, 9, a);
  const Tensor tb = uniform_init({64}, 9, b);
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i] == tb[i]);
}

TEST_CASE("reduce") {
  CHECK(reduce(Tensor({3}, {1, 2, 3}), Reduction::Sum) == 6.0);
  CHECK(reduce(Tensor({2}, {3, 4}), Reduction::L2Norm) == 5.0);
  CHECK(reduce(Tensor({3}, {-1, 5, 2}), Reduction::Max) == 5.0);
  CHECK(reduce(Tensor({3}, {-1, 5, 2}), Reduction::Min) == -1.0);
  CHECK_THROWS_AS(reduce(Tensor(), Reduction::Sum), DimensionError);
}

TEST_CASE("variance of fan_in 1 samples is near 1/3") {
  Rng rng(2024);
  const Tensor a = uniform_init({1000}, 1, rng);
  CHECK(reduce(a, Reduction::Variance) ==
        doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("rng split rule and determinism") {
  Rng parent(555);
  Rng child1 = parent.split("consumer");
  Rng child2 = parent.split("consumer");
  CHECK(child1.seed() == (555ull ^ stream_tag("consumer")));
  for (int i = 0; i < 16; ++i) CHECK(child1.next_u64() == child2.next_u64());
  Rng other = parent.split("other");
  CHECK(other.seed() != child1.seed());
}

TEST_CASE("transpose and stack helpers") {
  const Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor at = transpose(a);
  CHECK(at.rows() == 3);
  CHECK(at.at(0, 1) == 4.0);
  CHECK(at.at(2, 0) == 3.0);

  Tensor frames({2, 1, 3});
  set_time_slice(frames, 1, Tensor({1, 3}, {7, 8, 9}));
  const Tensor s = time_slice(frames, 1);
  CHECK(s.at(0, 2) == 9.0);
  const Tensor stacked = stack_slices({Tensor({1, 2}, {1, 2}),
                                       Tensor({1, 2}, {3, 4})});
  CHECK(stacked.extent(0) == 2);
  CHECK(stacked[3] == 4.0);
}

}  // TEST_SUITE
