#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "msgfn/model/policy.hpp"

using namespace msgfn;

namespace {

/// Nudges every parameter so the action head is no longer uniform.
void perturb(Policy& p, Rng& rng, double scale = 0.3) {
  for (auto& param : p.params())
    for (double& v : param.value.values()) v += uniform(rng, -scale, scale);
}

}  // namespace

TEST(ScanOrder, ThreeByThreeSnake) {
  const std::vector<std::pair<int, int>> expected{{0, 0}, {0, 1}, {0, 2}, {1, 2}, {1, 1},
                                                  {1, 0}, {2, 0}, {2, 1}, {2, 2}};
  EXPECT_EQ(scan_order(3, 3), expected);
}

TEST(ScanOrder, DegenerateShapes) {
  EXPECT_EQ(scan_order(1, 3), (std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(scan_order(3, 1), (std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}}));
}

TEST(ScanOrder, VisitsEveryCellOnce) {
  for (int w = 1; w <= 7; ++w)
    for (int h = 1; h <= 7; ++h) {
      auto order = scan_order(w, h);
      std::sort(order.begin(), order.end());
      ASSERT_EQ(order.size(), static_cast<std::size_t>(w * h));
      EXPECT_EQ(std::unique(order.begin(), order.end()), order.end());
    }
}

TEST(ScanOrder, SequenceRoundTrip) {
  Rng rng(1);
  Level l(Game::zelda, 4, 3);
  for (auto& c : l.cells) c = static_cast<TileId>(uniform_index(rng, 8));
  EXPECT_EQ(sequence_to_level(level_to_sequence(l), {4, 3}, Game::zelda), l);
}

TEST(StepInput, FirstStepUsesBos) {
  const std::vector<double> emb(kEmbed, 0.5);
  const auto x = step_input(emb, 7, false, 7);
  ASSERT_EQ(x.size(), kEmbed + 9);
  EXPECT_EQ(x[kEmbed + 7], 1.0);
  for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(x[kEmbed + k], 0.0);
  EXPECT_EQ(x.back(), 0.0);
}

TEST(StepInput, RowFlag) {
  EXPECT_FALSE(row_changed(0, 3));
  EXPECT_TRUE(row_changed(3, 3));
  EXPECT_FALSE(row_changed(4, 3));
  const auto x = step_input(std::vector<double>(kEmbed, 0.0), 2, true, 7);
  EXPECT_EQ(x.back(), 1.0);
  EXPECT_EQ(x[kEmbed + 2], 1.0);
  EXPECT_THROW(step_input(std::vector<double>(kEmbed, 0.0), 8, false, 7), DimensionError);
}

TEST(Embed, ZeroWeightsGiveZero) {
  Rng rng(2);
  Policy p(7, 2, rng);
  for (auto& param : p.params())
    if (param.name.rfind("embed.", 0) == 0) param.value.fill(0.0);
  Tape tape(p.params());
  const auto e = p.embed(tape, p.condition_input(tape, {{0.3, 0.9}, {5.0, -1.0}}, {4, 4}));
  for (double v : tape.value(e).values()) EXPECT_EQ(v, 0.0);
}

TEST(Embed, GradientWrtConditions) {
  Rng rng(3);
  Policy p(3, 2, rng);
  perturb(p, rng);
  std::vector<double> u{0.4, -0.2};
  auto loss = [&](const std::vector<double>& uu) {
    Tape tape(p.params());
    const auto e = p.embed(tape, p.condition_input(tape, {uu}, {3, 2}));
    double s = 0;
    for (std::size_t k = 0; k < kEmbed; ++k) s += std::sin(static_cast<double>(k)) * tape.value(e)[k];
    return s;
  };
  Tape tape(p.params());
  const auto cond = p.condition_input(tape, {u}, {3, 2});
  const auto e = p.embed(tape, cond);
  std::vector<double> weights(kEmbed);
  for (std::size_t k = 0; k < kEmbed; ++k) weights[k] = std::sin(static_cast<double>(k));
  const auto w = tape.input(Tensor({1, kEmbed}, weights));
  tape.backward(tape.sum(tape.mul(e, w)));
  for (std::size_t j = 0; j < 2; ++j) {
    auto up = u, down = u;
    up[j] += 1e-5;
    down[j] -= 1e-5;
    const double numeric = (loss(up) - loss(down)) / 2e-5;
    EXPECT_NEAR(tape.grad(cond).at(0, j), numeric, 1e-7 * std::max(1.0, std::abs(numeric)));
  }
}

TEST(Rollout, FreshNetworkIsUniform) {
  Rng rng(4);
  const Policy p(7, 2, rng);
  const Trajectory t = rollout(p, {0.2, 0.5}, {3, 3}, rng);
  ASSERT_EQ(t.tiles.size(), 9u);
  for (double lp : t.step_log_probs) EXPECT_EQ(lp, -std::log(7.0));
  EXPECT_NEAR(t.log_pf, -9 * std::log(7.0), 1e-9);
}

TEST(Rollout, FreshNetworkTeacherForcing) {
  Rng rng(5);
  const Policy p(7, 2, rng);
  Level l(Game::sokoban, 3, 3);
  for (auto& c : l.cells) c = static_cast<TileId>(uniform_index(rng, 7));
  EXPECT_NEAR(teacher_force(p, l, {0.1, 0.1}), -9 * std::log(7.0), 1e-9);
}

TEST(Rollout, StepDistributionsNormalized) {
  Rng rng(6);
  Policy p(8, 3, rng);
  perturb(p, rng, 0.5);
  Tape tape(p.params());
  std::vector<Rng> rngs{make_stream(1, {0}), make_stream(1, {1})};
  const auto cond = p.condition_input(tape, {{0.1, 0.2, 0.3}, {1, 1, 1}}, {3, 4});
  p.forward(tape, cond, {3, 4}, {nullptr, nullptr}, &rngs);
  std::size_t checked = 0;
  for (std::size_t n = 0; n < tape.size(); ++n) {
    const Tensor& v = tape.value(n);
    if (v.cols() != 8 || v.rows() != 2) continue;
    for (std::size_t b = 0; b < 2; ++b) {
      double s = 0;
      for (double x : v.row(b)) s += std::exp(x);
      EXPECT_NEAR(s, 1.0, 1e-10);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 12u);
}

TEST(Rollout, SameSeedSameTrajectory) {
  Rng rng(7);
  Policy p(7, 2, rng);
  perturb(p, rng);
  Rng a = make_stream(9, {1, 2}), b = make_stream(9, {1, 2});
  const Trajectory ta = rollout(p, {0.3, 0.3}, {4, 4}, a);
  const Trajectory tb = rollout(p, {0.3, 0.3}, {4, 4}, b);
  EXPECT_EQ(ta.tiles, tb.tiles);
  EXPECT_EQ(ta.log_pf, tb.log_pf);
}

TEST(Rollout, TeacherForcingReproducesSampledLogProb) {
  Rng rng(8);
  Policy p(7, 2, rng);
  perturb(p, rng);
  for (int i = 0; i < 20; ++i) {
    Rng r = make_stream(3, {static_cast<std::uint64_t>(i)});
    const std::vector<double> u{uniform01(rng), uniform01(rng)};
    const Trajectory t = rollout(p, u, {4, 3}, r);
    const Level l = sequence_to_level(t.tiles, {4, 3}, Game::sokoban);
    EXPECT_EQ(teacher_force(p, l, u), t.log_pf);
    double s = 0;
    for (double lp : t.step_log_probs) s += lp;
    EXPECT_EQ(s, t.log_pf);
  }
}

TEST(Rollout, BatchResultsIndependentOfChunkingAndThreads) {
  Rng rng(9);
  Policy p(7, 2, rng);
  perturb(p, rng);
  std::vector<std::vector<double>> u;
  for (int i = 0; i < 13; ++i) u.push_back({uniform01(rng), uniform01(rng)});
  auto streams = [] {
    std::vector<Rng> r;
    for (std::uint64_t i = 0; i < 13; ++i) r.push_back(make_stream(5, {i}));
    return r;
  };
  auto r1 = streams(), r2 = streams(), r3 = streams();
  const auto a = rollout_batch(p, u, {3, 3}, r1, 1, 64);
  const auto b = rollout_batch(p, u, {3, 3}, r2, 3, 4);
  const auto c = rollout_batch(p, u, {3, 3}, r3, 1, 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_EQ(a[i].tiles, b[i].tiles);
    EXPECT_EQ(a[i].log_pf, b[i].log_pf);
    EXPECT_EQ(a[i].tiles, c[i].tiles);
    EXPECT_EQ(a[i].log_pf, c[i].log_pf);
  }
}

TEST(Rollout, EmpiricalFrequenciesUniform) {
  Rng rng(10);
  const Policy p(7, 1, rng);
  const std::size_t n = 100000;
  std::vector<std::vector<double>> u(n, std::vector<double>{0.5});
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < n; ++i) rngs.push_back(make_stream(11, {i}));
  const auto trajs = rollout_batch(p, u, {2, 1}, rngs, default_threads(), 512);
  for (std::size_t step = 0; step < 2; ++step) {
    std::vector<double> freq(7, 0.0);
    for (const auto& t : trajs) freq[t.tiles[step]] += 1.0 / n;
    for (double f : freq) EXPECT_NEAR(f, 1.0 / 7, 0.01);
  }
}

TEST(Rollout, AnySizeWithoutFlowHead) {
  Rng rng(12);
  const Policy p(8, 3, rng);
  EXPECT_FALSE(p.has_flow_head({9, 2}));
  const Trajectory t = rollout(p, {0, 0, 0}, {9, 2}, rng);
  EXPECT_EQ(t.tiles.size(), 18u);
}

TEST(TeacherForce, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  Policy p(2, 1, rng);
  perturb(p, rng, 0.2);
  std::vector<TileId> seq{0, 1, 1, 0};
  const std::vector<double> u{0.7};
  auto loss = [&] {
    Tape tape(p.params());
    const auto cond = p.condition_input(tape, {u}, {2, 2});
    return tape.value(p.forward(tape, cond, {2, 2}, {&seq}, nullptr).log_pf)[0];
  };
  Tape tape(p.params());
  const auto cond = p.condition_input(tape, {u}, {2, 2});
  const Gradients g = tape.backward(tape.sum(p.forward(tape, cond, {2, 2}, {&seq}, nullptr).log_pf));
  Rng pick(14);
  const auto r = oracle::compare_sampled(p.params(), g, loss, 400, pick);
  EXPECT_LT(r.relative_error, 1e-6);
  EXPECT_GT(r.analytic_norm, 0.0);
}

TEST(FlowHead, FreshHeadIsZero) {
  Rng rng(15);
  Policy p(7, 2, rng);
  EXPECT_THROW(log_z0(p, {0.1, 0.2}, {5, 5}), std::out_of_range);
  p.add_flow_head({5, 5}, rng);
  EXPECT_EQ(log_z0(p, {0.1, 0.2}, {5, 5}), 0.0);
  p.add_flow_head({4, 4}, rng);
  EXPECT_EQ(p.flow_sizes(), (std::vector<Size>{{4, 4}, {5, 5}}));
}

TEST(FlowHead, SizesUseDisjointParameters) {
  Rng rng(16);
  Policy p(7, 2, rng);
  p.add_flow_head({4, 4}, rng);
  p.add_flow_head({5, 5}, rng);
  perturb(p, rng);
  const double before = log_z0(p, {0.3, 0.4}, {4, 4});
  for (auto& param : p.params())
    if (param.name.rfind("flow.5x5", 0) == 0)
      for (double& v : param.value.values()) v += 1.0;
  EXPECT_EQ(log_z0(p, {0.3, 0.4}, {4, 4}), before);
  EXPECT_NE(log_z0(p, {0.3, 0.4}, {5, 5}), 0.0);
}

TEST(FlowHead, GradientMatchesFiniteDifferences) {
  Rng rng(17);
  Policy p(3, 2, rng);
  p.add_flow_head({3, 3}, rng);
  perturb(p, rng);
  const std::vector<double> u{0.2, 0.9};
  auto loss = [&] { return log_z0(p, u, {3, 3}); };
  Tape tape(p.params());
  const Gradients g = tape.backward(tape.sum(p.log_z0(tape, p.condition_input(tape, {u}, {3, 3}), {3, 3})));
  double diff = 0, norm = 0;
  for (const char* name : {"flow.3x3.0.weight", "flow.3x3.0.bias", "flow.3x3.1.weight", "flow.3x3.1.bias"}) {
    const auto i = p.params().index(name);
    auto v = p.params()[i].value.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double orig = v[k];
      v[k] = orig + 1e-5;
      const double up = loss();
      v[k] = orig - 1e-5;
      const double down = loss();
      v[k] = orig;
      const double n = (up - down) / 2e-5;
      diff += (g[i][k] - n) * (g[i][k] - n);
      norm += n * n;
    }
  }
  EXPECT_LT(std::sqrt(diff / norm), 1e-6);
}

TEST(Policy, ReloadFromParameters) {
  Rng rng(18);
  Policy p(7, 2, rng);
  perturb(p, rng);
  const Policy q(p.params(), 7, 2);
  Rng a = make_stream(1, {1}), b = make_stream(1, {1});
  EXPECT_EQ(rollout(p, {0.1, 0.2}, {3, 3}, a).tiles, rollout(q, {0.1, 0.2}, {3, 3}, b).tiles);
  EXPECT_THROW(Policy(p.params(), 8, 2), DimensionError);
}
