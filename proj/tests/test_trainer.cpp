// Copyright 2026 The TAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tan/experiment.hpp"
#include "tan/trainer.hpp"

namespace tanet {
namespace {

DomainDataset small_moons(std::uint64_t seed = 0, std::size_t n = 200) {
  ShiftSpec s;
  s.n_source = s.n_target = n;
  s.positive_fraction_source = 0.3;
  s.positive_mode_shift = {0.225, 0.0};
  return generate_task_shift_moons(s, seed);
}

TrainConfig small_config(std::size_t epochs = 3) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = 7;
  c.mmd_probe = 64;
  return c;
}

TEST(Schedule, KnownValuesAndMonotone) {
  EXPECT_DOUBLE_EQ(lr_schedule(0.004, 0.001, 0.75, 0), 0.004);
  EXPECT_NEAR(lr_schedule(0.004, 0.001, 0.75, 1000), 0.004 * std::pow(2.0, -0.75), 1e-15);
  EXPECT_NEAR(lr_schedule(0.004, 0.001, 0.75, 1000), 0.0023784, 5e-8);
  double prev = lr_schedule(0.004, 0.001, 0.75, 0);
  for (std::size_t k = 1; k < 5000; k += 7) {
    const double cur = lr_schedule(0.004, 0.001, 0.75, k);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Nesterov, ZeroGradientLeavesParametersUnchanged) {
  Tensor w = Tensor::from_rows({{1.0, -2.0}});
  const Tensor before = w;
  NesterovSgd opt(0.9);
  Tensor* slots[] = {&w};
  const Tensor zero({1, 2}, 0.0);
  for (int i = 0; i < 5; ++i) opt.apply(slots, std::span<const Tensor>(&zero, 1), 0.1);
  EXPECT_EQ(w, before);
}

TEST(Nesterov, ZeroMomentumIsPlainSgd) {
  Tensor w = Tensor::from_rows({{3.0}});
  NesterovSgd opt(0.0);
  Tensor* slots[] = {&w};
  const Tensor g = Tensor::from_rows({{0.5}});
  opt.apply(slots, std::span<const Tensor>(&g, 1), 0.2);
  EXPECT_DOUBLE_EQ(w.item(), 3.0 - 0.2 * 0.5);
}

// f(w) = a w^2 / 2, gradient taken at the look-ahead point.
TEST(Nesterov, TwoStepsOnQuadraticMatchRecursion) {
  const double a = 1.7, mom = 0.9, lr = 0.05;
  Tensor w = Tensor::from_rows({{2.0}});
  NesterovSgd opt(mom);
  Tensor* slots[] = {&w};
  double ww = 2.0, v = 0.0;
  for (int step = 0; step < 2; ++step) {
    const std::vector<Tensor> ahead = opt.lookahead(std::vector<const Tensor*>{&w});
    const Tensor g = Tensor::from_rows({{a * ahead[0].item()}});
    opt.apply(slots, std::span<const Tensor>(&g, 1), lr);
    v = mom * v - lr * a * (ww + mom * v);
    ww += v;
    EXPECT_NEAR(w.item(), ww, 1e-12);
  }
}

struct AdaptorFixture {
  TrainConfig config;
  DomainDataset data = small_moons(1, 120);
  NetworkParams previous, current;
  AdaptorParams adaptor;
  PivotSet pivot;

  explicit AdaptorFixture(AdaptorVariant variant = AdaptorVariant::kLiteral) {
    config.m = 2;
    config.batch_per_domain = 4;
    config.adaptor_variant = variant;
    config.adaptor_hidden = {6};
    config.feature_dim = 5;
    config.feature_hidden = {8};
    config.discriminator_hidden = {4};
    auto init = init_networks(config.network_specs(2), 11);
    previous = init.first;
    adaptor = init.second;
    current = init_networks(config.network_specs(2), 12).first;
    // Fixed, class-complete pivots; a fresh model may predict one class only.
    pivot.m = 2;
    pivot.source_by_class = {{{0, 0.9}, {3, 0.8}}, {{5, 0.7}, {1, 0.6}}};
    pivot.target_by_class = {{{2, 0.9}, {4, 0.8}}, {{7, 0.7}, {6, 0.6}}};
  }
};

TEST(UpdateAdaptor, UnchangedFeatureExtractorLeavesThetaUnchanged) {
  AdaptorFixture f;
  const AdaptorParams before = f.adaptor;
  ASSERT_TRUE(update_adaptor(f.adaptor, f.pivot, f.data.source.x, f.data.target_train, f.current,
                             f.current, 0.5, CriticActivation::kTanh, AdaptorVariant::kLiteral)
                  .has_value());
  EXPECT_EQ(f.adaptor, before);
}

TEST(UpdateAdaptor, ZeroRateLeavesThetaUnchanged) {
  AdaptorFixture f;
  const AdaptorParams before = f.adaptor;
  update_adaptor(f.adaptor, f.pivot, f.data.source.x, f.data.target_train, f.previous, f.current,
                 0.0, CriticActivation::kTanh, AdaptorVariant::kLiteral);
  EXPECT_EQ(f.adaptor, before);
}

TEST(UpdateAdaptor, StepFollowsFiniteDifferenceGradient) {
  for (AdaptorVariant variant : {AdaptorVariant::kLiteral, AdaptorVariant::kPooled}) {
    AdaptorFixture f(variant);
    MlpParams grad;
    feature_critic_gradient(f.adaptor, f.pivot, f.data.source.x, f.data.target_train, f.previous,
                            f.current, CriticActivation::kTanh, variant, &grad);
    auto loss_at = [&](const AdaptorParams& a) {
      return feature_critic_gradient(a, f.pivot, f.data.source.x, f.data.target_train, f.previous,
                                     f.current, CriticActivation::kTanh, variant, nullptr);
    };
    const std::vector<Tensor*> slots = parameter_tensors(f.adaptor.theta);
    const std::vector<Tensor*> grads = parameter_tensors(grad);
    double worst = 0.0;
    for (std::size_t t = 0; t < slots.size(); ++t) {
      for (std::size_t j = 0; j < slots[t]->size(); j += 3) {
        AdaptorParams up = f.adaptor, down = f.adaptor;
        (*parameter_tensors(up.theta)[t])[j] += testing::kFdStep;
        (*parameter_tensors(down.theta)[t])[j] -= testing::kFdStep;
        const double fd = (loss_at(up) - loss_at(down)) / (2.0 * testing::kFdStep);
        const double an = (*grads[t])[j];
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), testing::kRelFloor}));
      }
    }
    EXPECT_LT(worst, 1e-4) << to_string(variant);

    const AdaptorParams before = f.adaptor;
    update_adaptor(f.adaptor, f.pivot, f.data.source.x, f.data.target_train, f.previous,
                   f.current, 0.25, CriticActivation::kTanh, variant);
    const std::vector<Tensor*> after = parameter_tensors(f.adaptor.theta);
    AdaptorParams copy = before;
    const std::vector<Tensor*> orig = parameter_tensors(copy.theta);
    for (std::size_t t = 0; t < after.size(); ++t) {
      for (std::size_t j = 0; j < after[t]->size(); ++j) {
        EXPECT_DOUBLE_EQ((*after[t])[j], (*orig[t])[j] - 0.25 * (*grads[t])[j]);
      }
    }
  }
}

TEST(UpdateAdaptor, EmptyClassSkipsStep) {
  AdaptorFixture f;
  f.pivot.target_by_class[1].clear();
  const AdaptorParams before = f.adaptor;
  EXPECT_FALSE(update_adaptor(f.adaptor, f.pivot, f.data.source.x, f.data.target_train,
                              f.previous, f.current, 0.5, CriticActivation::kTanh,
                              AdaptorVariant::kLiteral)
                   .has_value());
  EXPECT_EQ(f.adaptor, before);
}

struct MainBatch {
  DomainDataset data = small_moons(2, 64);
  TrainConfig config = small_config();
  NetworkParams params;
  AdaptorParams adaptor;
  Tensor xs, xt;
  std::vector<std::size_t> ys;

  MainBatch() {
    std::tie(params, adaptor) = init_networks(config.network_specs(2), 5);
    std::vector<std::size_t> rows(16);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    xs = data.source.x.gather_rows(rows);
    xt = data.target_train.gather_rows(rows);
    for (std::size_t r : rows) ys.push_back(data.source.labels[r]);
  }
};

// Gradients of L_cls alone, from a graph that has no domain branch at all.
std::vector<Tensor> classification_only_gradients(const NetworkParams& p, const Tensor& xs,
                                                  const std::vector<std::size_t>& ys) {
  ad::Graph g;
  const BoundMlp phi = bind(g, p.phi, true), psi = bind(g, p.psi, true);
  g.backward(classification_loss(forward(psi, forward(phi, g.constant(xs))), ys));
  std::vector<Tensor> out;
  for (const auto* net : {&phi, &psi}) {
    for (const auto& [w, b] : net->layers) {
      out.push_back(g.grad(w));
      out.push_back(g.grad(b));
    }
  }
  return out;
}

TEST(MainUpdate, WithoutAdaptationGradientsAreSupervisedOnly) {
  MainBatch b;
  const std::vector<Tensor> full = main_gradients(b.params, b.adaptor, b.xs, b.ys, b.xt, {0.0, 0.0},
                                                  AdaptorVariant::kLiteral);
  const std::vector<Tensor> oracle = classification_only_gradients(b.params, b.xs, b.ys);
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_EQ(full[i], oracle[i]) << i;
  for (std::size_t i = oracle.size(); i < full.size(); ++i) {
    EXPECT_EQ(full[i], Tensor(full[i].shape(), 0.0)) << "discriminator gradient " << i;
  }
}

// The reversal makes phi ascend the domain loss that omega descends.
TEST(MainUpdate, DomainBranchReversesOnlyFeatureGradients) {
  MainBatch b;
  const double lambda = 0.7;
  const auto with = main_gradients(b.params, b.adaptor, b.xs, b.ys, b.xt, {lambda, 0.0},
                                   AdaptorVariant::kLiteral);
  const auto without = main_gradients(b.params, b.adaptor, b.xs, b.ys, b.xt, {0.0, 0.0},
                                      AdaptorVariant::kLiteral);
  ad::Graph g;
  const BoundMlp phi = bind(g, b.params.phi, true), omega = bind(g, b.params.omega, true);
  g.backward(domain_adversarial_loss(omega, forward(phi, g.constant(b.xs)),
                                     forward(phi, g.constant(b.xt)), false));
  std::vector<Tensor> dom;
  for (const auto& [w, bias] : phi.layers) {
    dom.push_back(g.grad(w));
    dom.push_back(g.grad(bias));
  }
  const std::size_t n_phi = dom.size(), n_psi = 2 * b.params.psi.layers.size();
  for (const auto& [w, bias] : omega.layers) {
    dom.push_back(g.grad(w));
    dom.push_back(g.grad(bias));
  }
  for (std::size_t i = 0; i < n_phi; ++i) {
    for (std::size_t j = 0; j < with[i].size(); ++j) {
      EXPECT_NEAR(with[i][j], without[i][j] - lambda * dom[i][j], 1e-12);
    }
  }
  for (std::size_t i = n_phi; i < n_phi + n_psi; ++i) EXPECT_EQ(with[i], without[i]);
  for (std::size_t i = n_phi + n_psi; i < with.size(); ++i) {
    for (std::size_t j = 0; j < with[i].size(); ++j) {
      EXPECT_NEAR(with[i][j], lambda * dom[i - n_psi][j], 1e-12);
    }
  }
}

TEST(MainUpdate, NonFiniteGradientAbortsAndNamesTheTerm) {
  MainBatch b;
  b.params.omega.layers[0].weight(0, 0) = std::numeric_limits<double>::infinity();
  NesterovSgd opt(0.9);
  try {
    update_main(b.params, b.adaptor, b.xs, b.ys, b.xt, {1.0, 0.0}, AdaptorVariant::kLiteral, opt, 0.01);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_NE(std::string(e.what()).find("L_feat"), std::string::npos) << e.what();
  }
}

TEST(Fit, ZeroEpochsReturnsInitialization) {
  const TrainConfig c = small_config(0);
  const DomainDataset d = small_moons();
  const FitResult r = fit(c, d);
  EXPECT_TRUE(r.log.epochs.empty());
  const FitResult again = fit(c, d);
  EXPECT_EQ(r.params, again.params);
  EXPECT_EQ(r.adaptor, again.adaptor);
}

TEST(Fit, DeterministicForSameSeed) {
  const DomainDataset d = small_moons();
  const FitResult a = fit(small_config(), d), b = fit(small_config(), d);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.adaptor, b.adaptor);
  std::ostringstream la, lb;
  a.log.write_csv(la);
  b.log.write_csv(lb);
  EXPECT_EQ(la.str(), lb.str());
  TrainConfig other = small_config();
  other.seed = 8;
  EXPECT_FALSE(fit(other, d).params == a.params);
}

TEST(Fit, ClassificationOnlyVariantEqualsZeroWeights) {
  const DomainDataset d = small_moons();
  TrainConfig c = small_config();
  c.weights = effective_weights(Variant::kClsOnly, c.weights);
  EXPECT_EQ(c.weights.lambda, 0.0);
  EXPECT_EQ(c.weights.mu, 0.0);
  TrainConfig explicit_zero = small_config();
  explicit_zero.weights = {0.0, 0.0};
  EXPECT_EQ(fit(c, d).params, fit(explicit_zero, d).params);
}

TEST(Fit, WithoutTaskTermAdaptorIsNeverTouched) {
  const DomainDataset d = small_moons();
  TrainConfig c = small_config();
  c.weights.mu = 0.0;
  int updates = 0;
  FitHooks hooks;
  hooks.on_adaptor_update = [&](std::size_t, const AdaptorParams&) { ++updates; };
  const FitResult r = fit(c, d, hooks);
  EXPECT_EQ(updates, 0);
  c.epochs = 0;
  EXPECT_EQ(r.adaptor, fit(c, d).adaptor);
  for (const EpochRecord& e : r.log.epochs) {
    EXPECT_FALSE(e.adaptor_updated);
    EXPECT_EQ(e.l_val, 0.0);
  }
}

TEST(Fit, AssistModelIsFrozenWithinEachEpoch) {
  const DomainDataset d = small_moons(3, 100);
  TrainConfig c = small_config(3);
  const std::size_t per_epoch = (100 + c.batch_per_domain - 1) / c.batch_per_domain;
  std::vector<NetworkParams> assists, mains;
  FitHooks hooks;
  hooks.on_batch = [&](const NetworkParams& main, const NetworkParams& assist) {
    mains.push_back(main);
    assists.push_back(assist);
  };
  fit(c, d, hooks);
  ASSERT_EQ(assists.size(), 3 * per_epoch);
  for (std::size_t e = 0; e < 3; ++e) {
    for (std::size_t b = 1; b < per_epoch; ++b) {
      EXPECT_EQ(assists[e * per_epoch + b], assists[e * per_epoch]);
    }
    if (e > 0) EXPECT_EQ(assists[e * per_epoch], mains[e * per_epoch - 1]);
  }
  EXPECT_FALSE(assists[per_epoch] == assists[0]);
}

TEST(Fit, OneAdaptorStepPerEpoch) {
  const DomainDataset d = small_moons();
  const TrainConfig c = small_config(4);
  std::vector<std::size_t> epochs;
  AdaptorParams last;
  FitHooks hooks;
  hooks.on_adaptor_update = [&](std::size_t e, const AdaptorParams& a) {
    epochs.push_back(e);
    last = a;
  };
  const FitResult r = fit(c, d, hooks);
  // An epoch whose pivot set misses a class skips its step and says so.
  std::vector<std::size_t> updated;
  for (const EpochRecord& e : r.log.epochs) {
    if (e.adaptor_updated) {
      updated.push_back(e.epoch);
    } else {
      EXPECT_FALSE(e.pivot_warnings.empty());
    }
  }
  EXPECT_EQ(epochs, updated);
  EXPECT_GE(updated.size(), 3u);
  EXPECT_EQ(r.adaptor, last);
}

TEST(Fit, LogHasOneRowPerEpoch) {
  const FitResult r = fit(small_config(2), small_moons());
  std::ostringstream out;
  r.log.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, TrainLog::kCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
  EXPECT_GT(r.log.epochs[0].lr, r.log.epochs[1].lr);
}

TEST(Fit, ClassificationLossFallsOnBenchmark) {
  ShiftSpec s = benchmark_shift();
  s.n_source = s.n_target = 800;
  TrainConfig c;
  c.epochs = 30;
  double first = 0.0, last = 0.0;
  FitHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    if (r.epoch == 1) first = r.l_cls;
    if (r.epoch == 30) last = r.l_cls;
  };
  fit(c, generate_task_shift_moons(s, 0), hooks);
  EXPECT_LT(last, first);
}

TEST(Fit, RejectsBatchNotMatchingPivotSize) {
  TrainConfig c = small_config();
  c.batch_per_domain = 10;
  EXPECT_THROW(fit(c, small_moons()), std::invalid_argument);
}

TEST(Predict, ZeroModelGivesHalfAndFirstClass) {
  const NetworkSpecs s = small_config().network_specs(2);
  const NetworkParams zero{zero_params(s.feature), zero_params(s.classifier), zero_params(s.discriminator)};
  const Prediction p = predict(zero, Tensor({4, 2}, 1.5));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(p.labels[i], 0u);
    EXPECT_EQ(p.probabilities(i, 0), 0.5);
    EXPECT_EQ(p.probabilities(i, 1), 0.5);
  }
}

TEST(Predict, RepeatedCallsIdenticalAndSeparableDataLearned) {
  ShiftSpec s;
  s.rotation_deg = 0.0;
  s.noise_std = 0.1;
  s.n_source = s.n_target = 400;
  s.positive_fraction_source = s.positive_fraction_target = 0.5;
  const DomainDataset d = generate_gaussian_blobs(s, 1);
  TrainConfig c = small_config(3);
  c.weights = {0.0, 0.0};
  const FitResult r = fit(c, d);
  const Prediction a = predict(r.params, d.source.x), b = predict(r.params, d.source.x);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.probabilities, b.probabilities);
  EXPECT_GT(evaluate(r.params, d.source).accuracy, 0.95);
}

}  // namespace
}  // namespace tanet
