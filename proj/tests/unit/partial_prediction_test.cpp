#include <algorithm>

#include <gtest/gtest.h>

#include "claimnet/coxnet.hpp"
#include "claimnet/datagen.hpp"
#include "claimnet/partial_prediction.hpp"

using namespace claimnet;

namespace {

struct Fixture {
  GeneratedData data;
  FittedModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.data = generate(preset("interaction-v1", 1500, 17));
    TrainConfig c;
    c.lambda = 2;
    c.hidden = 2;
    c.max_iterations = 150;
    out.model = train(out.data.records, build_codebook(out.data.records), c);
    return out;
  }();
  return f;
}

}  // namespace

TEST(Partial, EmptyInputMatchesEveryRecord) {
  const auto& f = fixture();
  const PartialPredictor p(f.model);
  const auto a = p.predict({}, PartialMethod::A);
  EXPECT_EQ(a.match_count, f.data.records.size());
  std::vector<double> etas;
  for (const auto& r : f.data.records) etas.push_back(predict_eta(f.model, r));
  EXPECT_EQ(a.eta, average_eta(etas));
}

TEST(Partial, FullProfileOfSingletonEqualsIndividualPrediction) {
  const auto& f = fixture();
  const PartialPredictor p(f.model);
  std::size_t checked = 0;
  for (const auto& r : f.data.records) {
    if (p.match(r.covariates).size() != 1) continue;
    const double eta = predict_eta(f.model, r);
    const auto direct = survival_from_eta(f.model.baseline, eta);
    EXPECT_EQ(p.predict(r.covariates, PartialMethod::A).curve, direct);
    const auto b = p.predict(r.covariates, PartialMethod::B).curve;
    for (std::size_t k = 0; k < b.survival.size(); ++k) EXPECT_NEAR(b.survival[k], direct.survival[k], 1e-12);
    if (++checked == 20) break;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Partial, MethodBLiesBetweenMatchedCurves) {
  const auto& f = fixture();
  const PartialPredictor p(f.model);
  Covariates in;
  in.set(Variable::SEX, "F");
  const auto ids = p.match(in);
  ASSERT_GT(ids.size(), 1u);
  const auto b = p.predict(in, PartialMethod::B);
  const auto& etas = p.training_etas();
  double lo = etas[ids[0]], hi = lo;
  for (const auto id : ids) {
    lo = std::min(lo, etas[id]);
    hi = std::max(hi, etas[id]);
  }
  const auto upper = survival_from_eta(f.model.baseline, lo);
  const auto lower = survival_from_eta(f.model.baseline, hi);
  for (std::size_t k = 0; k < b.curve.survival.size(); ++k) {
    EXPECT_LE(b.curve.survival[k], upper.survival[k] + 1e-12);
    EXPECT_GE(b.curve.survival[k], lower.survival[k] - 1e-12);
  }
}

TEST(Partial, EmbeddedProfilesMatchTrainingRecords) {
  const auto& f = fixture();
  const PartialPredictor embedded(f.model);
  const PartialPredictor explicit_records(f.model, f.data.records);
  Covariates in;
  in.set(Variable::AGE, "40");
  in.set(Variable::SEX, "M");
  EXPECT_EQ(embedded.predict(in, PartialMethod::B).curve, explicit_records.predict(in, PartialMethod::B).curve);
}

TEST(Partial, InvariantToTrainingOrder) {
  const auto& f = fixture();
  auto reversed = f.data.records;
  std::reverse(reversed.begin(), reversed.end());
  const PartialPredictor forward_order(f.model, f.data.records);
  const PartialPredictor reverse_order(f.model, reversed);
  Covariates in;
  in.set(Variable::SEX, "M");
  for (const auto m : {PartialMethod::A, PartialMethod::B}) {
    EXPECT_EQ(forward_order.predict(in, m).curve, reverse_order.predict(in, m).curve);
  }
}

TEST(Partial, EmptyMatchReportsConstraints) {
  const auto& f = fixture();
  const PartialPredictor p(f.model);
  // Find a combination of categories that no training record has.
  const auto* pob = f.model.codebook.find(Variable::POB);
  const auto* noi = f.model.codebook.find(Variable::NOI);
  const auto* toa = f.model.codebook.find(Variable::TOA);
  ASSERT_NE(pob, nullptr);
  ASSERT_NE(noi, nullptr);
  ASSERT_NE(toa, nullptr);
  bool found = false;
  Covariates in;
  for (std::size_t a = 0; a + 1 < pob->categories.size() && !found; ++a) {
    for (std::size_t b = 0; b + 1 < noi->categories.size() && !found; ++b) {
      for (std::size_t t = 0; t + 1 < toa->categories.size(); ++t) {
        Covariates c;
        c.set(Variable::POB, pob->categories[a]);
        c.set(Variable::NOI, noi->categories[b]);
        c.set(Variable::SEX, "F");
        c.set(Variable::TOA, toa->categories[t]);
        if (p.match(c).empty()) {
          in = c;
          found = true;
          break;
        }
      }
    }
  }
  ASSERT_TRUE(found);
  try {
    p.predict(in, PartialMethod::A);
    FAIL() << "expected EmptyMatchError";
  } catch (const EmptyMatchError& e) {
    EXPECT_EQ(e.constraints().size(), 4u);
    std::size_t least = SIZE_MAX;
    for (const auto& c : e.constraints()) least = std::min(least, c.matches);
    for (const auto& c : e.constraints()) {
      if (c.variable == e.most_restrictive()) {
        EXPECT_EQ(c.matches, least);
      }
    }
  }
  const auto relaxed = p.predict(in, PartialMethod::A, true);
  EXPECT_FALSE(relaxed.relaxed.empty());
  EXPECT_GT(relaxed.match_count, 0u);
}

TEST(Partial, UnknownVariableIsAnEncodingError) {
  const auto data = generate(preset("linear-v1", 200, 7));
  const auto cb = build_codebook(data.records);
  const auto model = train(data.records, cb, {});
  const PartialPredictor p(model);
  Covariates in;
  in.set(Variable::CPC, "E1A");
  EXPECT_THROW(p.predict(in, PartialMethod::A), EncodingError);
}
