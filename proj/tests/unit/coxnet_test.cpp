#include <cmath>

#include <gtest/gtest.h>

#include "claimnet/coxnet.hpp"
#include "claimnet/datagen.hpp"
#include "claimnet/errors.hpp"
#include "claimnet/model_io.hpp"
#include "claimnet/random.hpp"
#include "support.hpp"

using namespace claimnet;

namespace {

struct Problem {
  InputMatrix inputs;
  std::vector<double> durations;
  std::vector<std::uint8_t> events;
};

Problem random_problem(Rng& rng, std::size_t n_inputs, std::size_t records) {
  Problem p{InputMatrix(n_inputs), {}, {}};
  for (std::size_t r = 0; r < records; ++r) {
    std::vector<double> x(n_inputs);
    for (auto& v : x) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    p.inputs.add_dense_row(x);
    p.durations.push_back(std::ceil(rng.uniform() * 8));
    p.events.push_back(rng.uniform() < 0.75 ? 1 : 0);
  }
  p.events[0] = 1;
  return p;
}

NetworkWeights random_weights(Rng& rng, std::size_t inputs, std::size_t hidden) {
  NetworkWeights w(inputs, hidden);
  for (auto& v : w.parameters()) v = rng.uniform(-1, 1);
  return w;
}

}  // namespace

TEST(Forward, Examples) {
  NetworkWeights zero(3, 2);
  EXPECT_EQ(forward(zero, std::vector<double>{1, 0, 1}), 0.0);

  NetworkWeights linear(3, 0);
  linear.input_output(0) = 0.5;
  linear.input_output(1) = 1.0;
  linear.input_output(3) = -2.0;
  EXPECT_DOUBLE_EQ(forward(linear, std::vector<double>{1, 1, 1}), 0.5 + 1.0 - 2.0);

  NetworkWeights one(2, 1);
  one.hidden_output(0) = 2.0;
  EXPECT_DOUBLE_EQ(forward(one, std::vector<double>{1, 0}), 1.0);

  EXPECT_THROW(forward(one, std::vector<double>{1, 0, 0}), Error);
}

TEST(Forward, SparseMatchesDense) {
  Rng rng(1);
  const auto w = random_weights(rng, 6, 3);
  const std::vector<double> dense{0, 1, 0, 0, 1, 1};
  const std::vector<std::uint32_t> idx{1, 4, 5};
  const std::vector<double> ones(3, 1.0);
  EXPECT_DOUBLE_EQ(forward(w, dense), forward(w, idx, ones));
}

TEST(Penalty, BiasWeightsUseBiasDecay) {
  NetworkWeights w(2, 1);
  w.input_hidden(0, 0) = 1.0;  // bias -> hidden
  w.input_hidden(1, 0) = 2.0;
  w.hidden_output(0) = 3.0;
  w.input_output(0) = 4.0;     // bias -> output
  w.input_output(2) = 5.0;
  EXPECT_DOUBLE_EQ(penalty(w, 2.0, 0.5), 2.0 * (4 + 9 + 25) + 0.5 * (1 + 16));
  NetworkWeights doubled = w;
  for (auto& v : doubled.parameters()) v *= 2;
  EXPECT_DOUBLE_EQ(penalty(doubled, 2.0, 0.5), 4 * penalty(w, 2.0, 0.5));
}

TEST(TrainConfig, DefaultBiasDecayIsOneTwentyFifth) {
  TrainConfig c;
  c.lambda = 6;
  EXPECT_DOUBLE_EQ(c.bias_lambda(), 0.24);
  c.lambda_bias = 1.0;
  EXPECT_EQ(c.bias_lambda(), 1.0);
}

TEST(Objective, ZeroWeightsGiveNegativeLogLikelihood) {
  Rng rng(2);
  const auto p = random_problem(rng, 5, 20);
  const RiskSets risk(p.durations, p.events);
  const NetworkWeights zero(5, 2);
  EXPECT_DOUBLE_EQ(objective(zero, p.inputs, risk, 3.0, 0.1),
                   -cox_partial_loglik(std::vector<double>(20, 0.0), risk));
}

TEST(Gradient, PenaltyAloneIsTwoLambdaW) {
  Rng rng(3);
  const auto p = random_problem(rng, 4, 10);
  const RiskSets risk(p.durations, p.events);
  const auto w = random_weights(rng, 4, 2);
  const auto with = gradient(w, p.inputs, risk, 1.5, 0.2);
  const auto without = gradient(w, p.inputs, risk, 0.0, 0.0);
  for (std::size_t k = 0; k < w.parameters().size(); ++k) {
    const double lam = w.is_bias_parameter(k) ? 0.2 : 1.5;
    EXPECT_NEAR(with.parameters()[k] - without.parameters()[k], 2 * lam * w.parameters()[k], 1e-12);
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(42);
  double worst = 0.0;
  for (int draw = 0; draw < 25; ++draw) {
    const std::size_t n_i = 1 + rng.below(10);
    const std::size_t n_h = rng.below(4);
    const auto p = random_problem(rng, n_i, 5 + rng.below(26));
    const RiskSets risk(p.durations, p.events);
    auto w = random_weights(rng, n_i, n_h);
    const auto g = gradient(w, p.inputs, risk, 0.7, 0.03);
    for (std::size_t k = 0; k < w.parameters().size(); ++k) {
      const double saved = w.parameters()[k];
      w.parameters()[k] = saved + 1e-5;
      const double up = objective(w, p.inputs, risk, 0.7, 0.03);
      w.parameters()[k] = saved - 1e-5;
      const double down = objective(w, p.inputs, risk, 0.7, 0.03);
      w.parameters()[k] = saved;
      const double fd = (up - down) / 2e-5;
      const double rel = std::abs(fd - g.parameters()[k]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Train, HugeDecayShrinksWeights) {
  const auto data = generate(preset("linear-v1", 200, 7));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.lambda = 1e6;
  c.hidden = 2;
  const auto m = train(data.records, cb, c);
  for (const auto v : m.weights.parameters()) EXPECT_LT(std::abs(v), 1e-2);
}

TEST(Train, DeterministicPerSeed) {
  const auto data = generate(preset("linear-v1", 200, 7));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.lambda = 1;
  c.hidden = 3;
  c.seed = 99;
  const auto a = train(data.records, cb, c);
  const auto b = train(data.records, cb, c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  c.seed = 100;
  EXPECT_NE(serialize_model(train(data.records, cb, c)), serialize_model(a));
}

TEST(Train, ObjectiveNeverIncreases) {
  const auto data = generate(preset("interaction-v1", 1500, 3));
  const auto cb = build_codebook(data.records);
  const auto inputs = encode_inputs(data.records, cb);
  const auto o = outcomes_of(data.records);
  const RiskSets risk(o.durations, o.events);
  TrainConfig c;
  c.lambda = 1;
  c.hidden = 4;
  const auto fit = train_network(inputs, risk, c);
  for (std::size_t k = 1; k < fit.trace.size(); ++k) EXPECT_LE(fit.trace[k], fit.trace[k - 1]);
}

TEST(Train, PredictionsMatchTrainingEtas) {
  const auto data = generate(preset("interaction-v1", 600, 5));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.lambda = 2;
  c.hidden = 2;
  const auto m = train(data.records, cb, c);
  const auto inputs = encode_inputs(data.records, cb);
  const auto o = outcomes_of(data.records);
  const auto fit = train_network(inputs, RiskSets(o.durations, o.events), c);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const double eta = predict_eta(m, data.records[i]);
    EXPECT_EQ(eta, fit.etas[i]);
    EXPECT_TRUE(std::isfinite(eta));
    const auto s = survival_from_eta(m.baseline, eta);
    for (std::size_t k = 1; k < s.survival.size(); ++k) ASSERT_LE(s.survival[k], s.survival[k - 1]);
  }
}

TEST(Train, RejectsUnusableData) {
  std::vector<ClaimRecord> none_closed{test::record({{Variable::SEX, "M"}}, 1, false),
                                       test::record({{Variable::SEX, "F"}}, 2, false)};
  const auto cb = build_codebook(none_closed, 1);
  EXPECT_THROW(train(none_closed, cb, {}), Error);
  const std::vector<ClaimRecord> one{test::record({{Variable::SEX, "M"}})};
  EXPECT_THROW(train(one, build_codebook(one, 1), {}), Error);
  TrainConfig bad;
  bad.lambda = -1;
  EXPECT_THROW(train(none_closed, cb, bad), Error);
}

TEST(ModelDocument, RoundTripsBitExactly) {
  const auto data = generate(preset("interaction-v1", 800, 9));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.lambda = 0.3;
  c.hidden = 3;
  const auto m = train(data.records, cb, c);
  const auto text = serialize_model(m);
  const auto back = parse_model(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_model(back), text);
  for (const auto& r : data.records) EXPECT_EQ(predict_eta(back, r), predict_eta(m, r));
}

TEST(ModelDocument, RejectsBadDocuments) {
  EXPECT_THROW(parse_model("not json"), DataError);
  EXPECT_THROW(parse_model("{}"), DataError);
  EXPECT_THROW(parse_model(R"({"format":"claimnet-model","version":99})"), DataError);
}

TEST(CodebookDocument, RoundTrips) {
  const auto data = generate(preset("interaction-v1", 500, 1));
  const auto cb = build_codebook(data.records);
  EXPECT_EQ(codebook_from_json(to_json(cb)), cb);
}
