#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "claimnet/encoding.hpp"
#include "claimnet/errors.hpp"
#include "support.hpp"

using namespace claimnet;
using test::record;

namespace {

std::vector<ClaimRecord> noi_counts(std::initializer_list<std::pair<std::string, std::size_t>> counts) {
  std::vector<ClaimRecord> out;
  for (const auto& [code, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(record({{Variable::NOI, code}}));
  }
  return out;
}

// 100 ages whose nearest-rank quartiles are 30, 38 and 47.
std::vector<ClaimRecord> age_fixture() {
  std::vector<ClaimRecord> out;
  for (int k = 0; k < 100; ++k) {
    int age = 0;
    if (k < 25) {
      age = 18 + k / 2;
    } else if (k < 50) {
      age = 31 + (k - 25) * 8 / 25;
    } else if (k < 75) {
      age = 39 + (k - 50) * 9 / 25;
    } else {
      age = 48 + (k - 75);
    }
    out.push_back(record({{Variable::AGE, std::to_string(age)}}));
  }
  std::mt19937 rng(5);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

ClaimRecord full_record() {
  return record({{Variable::NOI, "34002"},
                 {Variable::POB, "31000"},
                 {Variable::SOI, "11000"},
                 {Variable::TOA, "02100"},
                 {Variable::AGE, "40"},
                 {Variable::SEX, "F"},
                 {Variable::SIC, "2011"},
                 {Variable::OCC, "7311"},
                 {Variable::PAY, "612.5"},
                 {Variable::CPC, "E1A"}});
}

}  // namespace

TEST(Consolidation, UnderRepresentedSiblingsPoolIntoParent) {
  const auto cb = build_codebook(noi_counts({{"34001", 4}, {"34002", 3}, {"34000", 5}}), 10);
  for (const auto* code : {"34001", "34002", "34000"}) EXPECT_EQ(cb.consolidate(Variable::NOI, code), "34000");
  const auto* coding = cb.find(Variable::NOI);
  ASSERT_NE(coding, nullptr);
  const auto idx = cb.category_index(Variable::NOI, "34000");
  EXPECT_EQ(coding->counts[idx], 12u);
}

TEST(Consolidation, FrequentCodeMapsToItself) {
  const auto cb = build_codebook(noi_counts({{"34001", 10}, {"34002", 3}, {"22000", 30}}), 10);
  EXPECT_EQ(cb.consolidate(Variable::NOI, "34001"), "34001");
  EXPECT_EQ(cb.consolidate(Variable::NOI, "22000"), "22000");
  // 34002 alone is too rare and its pool at 34000 stays at 3, so it climbs to the root.
  EXPECT_EQ(cb.consolidate(Variable::NOI, "34002"), "00000");
}

TEST(Consolidation, ParentCodes) {
  EXPECT_EQ(parent_code(Variable::NOI, "34002"), "34000");
  EXPECT_EQ(parent_code(Variable::NOI, "34000"), "30000");
  EXPECT_EQ(parent_code(Variable::NOI, "30000"), "00000");
  EXPECT_EQ(parent_code(Variable::NOI, "00000"), "00000");
  EXPECT_EQ(parent_code(Variable::SIC, "2011"), "2010");
  EXPECT_EQ(parent_code(Variable::CPC, "E1A"), "E1*");
  EXPECT_EQ(parent_code(Variable::CPC, "E1*"), "E**");
  EXPECT_EQ(parent_code(Variable::CPC, "E**"), "***");
  EXPECT_TRUE(is_root_code(Variable::CPC, "***"));
  EXPECT_TRUE(is_root_code(Variable::OCC, "0000"));
}

TEST(Consolidation, PropertiesOnRandomHierarchies) {
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    std::vector<ClaimRecord> records;
    std::uniform_int_distribution<int> digit(0, 3);
    std::vector<std::string> raw;
    for (int i = 0; i < 400; ++i) {
      std::string code = "1";
      for (int d = 0; d < 4; ++d) code += static_cast<char>('0' + digit(rng));
      raw.push_back(code);
      records.push_back(record({{Variable::POB, code}}));
    }
    const std::size_t min_count = 5 + static_cast<std::size_t>(round);
    const auto cb = build_codebook(records, min_count);
    const auto* coding = cb.find(Variable::POB);
    ASSERT_NE(coding, nullptr);
    // Totality over seen codes and idempotence.
    for (const auto& code : raw) {
      ASSERT_TRUE(coding->consolidation.count(code));
      const auto& once = cb.consolidate(Variable::POB, code);
      EXPECT_EQ(cb.consolidate(Variable::POB, once), once);
    }
    // Frequency guarantee by recount.
    std::map<std::string, std::size_t> recount;
    for (const auto& code : raw) ++recount[cb.consolidate(Variable::POB, code)];
    for (const auto& [label, n] : recount) {
      if (!is_root_code(Variable::POB, label)) {
        EXPECT_GE(n, min_count) << label;
      }
      EXPECT_EQ(coding->counts[cb.category_index(Variable::POB, label)], n);
    }
  }
}

TEST(Consolidation, RejectsMalformedCodesNamingRecordAndVariable) {
  auto records = noi_counts({{"34001", 3}});
  records.push_back(record({{Variable::NOI, "34A01"}}));
  try {
    build_codebook(records, 10);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("record 4"), std::string::npos) << what;
    EXPECT_NE(what.find("NOI"), std::string::npos) << what;
  }
  EXPECT_THROW(build_codebook(std::vector<ClaimRecord>{}, 10), Error);
  EXPECT_THROW(build_codebook(noi_counts({{"3400", 12}}), 10), DataError);
}

TEST(Quartiles, FixtureBoundaries) {
  const auto cb = build_codebook(age_fixture(), 10);
  const auto* coding = cb.find(Variable::AGE);
  ASSERT_NE(coding, nullptr);
  EXPECT_EQ(coding->boundaries, (std::array<double, 3>{30, 38, 47}));
  EXPECT_EQ(cb.category_index(Variable::AGE, "30"), 0u);
  EXPECT_EQ(cb.category_index(Variable::AGE, "30.5"), 1u);
  EXPECT_EQ(cb.category_index(Variable::AGE, "47"), 2u);
  EXPECT_EQ(cb.category_index(Variable::AGE, "80"), 3u);
}

TEST(Quartiles, BinAssignsTiesToLowerBin) {
  const std::array<double, 3> b{30, 38, 47};
  EXPECT_EQ(quartile_bin(30, b), 1);
  EXPECT_EQ(quartile_bin(38.5, b), 3);
  EXPECT_EQ(quartile_bin(100, b), 4);
  EXPECT_EQ(quartile_bin(-5, b), 1);
  EXPECT_EQ(quartile_bin(38, b), 2);
  EXPECT_EQ(quartile_bin(47.000001, b), 4);
}

TEST(Encode, FullRecordHasTenOnes) {
  std::vector<ClaimRecord> records(12, full_record());
  // Vary quantitative values so the quartile boundaries are strictly increasing.
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].covariates.set(Variable::AGE, std::to_string(20 + 3 * i));
    records[i].covariates.set(Variable::PAY, std::to_string(100 + 50 * i));
  }
  const auto cb = build_codebook(records, 10);
  std::size_t categories = 0;
  for (const auto& v : cb.variables()) categories += v.categories.size();
  EXPECT_EQ(cb.input_count(), categories);
  for (const auto& r : records) {
    const auto x = encode(r, cb);
    ASSERT_EQ(x.size(), cb.input_count());
    EXPECT_EQ(std::accumulate(x.begin(), x.end(), 0.0), 10.0);
    EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0 || v == 1.0; }));
    EXPECT_EQ(encode(r, cb), x);
  }
}

TEST(Encode, ConsolidatedCodeSetsParentNode) {
  const auto cb = build_codebook(noi_counts({{"34001", 4}, {"34002", 3}, {"34000", 5}, {"22000", 10}}), 10);
  const auto x = encode(record({{Variable::NOI, "34002"}}), cb);
  const auto node = cb.input_index(Variable::NOI, cb.category_index(Variable::NOI, "34000"));
  EXPECT_EQ(x[node], 1.0);
  EXPECT_EQ(std::accumulate(x.begin(), x.end(), 0.0), 1.0);
}

TEST(Encode, UnseenCodesRollUpOrFallToUnknown) {
  const auto cb = build_codebook(noi_counts({{"34000", 12}, {"22000", 10}}), 10);
  EXPECT_EQ(cb.consolidate(Variable::NOI, "34567"), "34000");
  EXPECT_EQ(cb.consolidate(Variable::NOI, "71234"), kUnknownCategory);
  const auto* coding = cb.find(Variable::NOI);
  EXPECT_EQ(coding->categories.back(), kUnknownCategory);
  EXPECT_EQ(cb.category_index(Variable::NOI, "71234"), coding->unknown_index());
  EXPECT_THROW(cb.category_index(Variable::NOI, "7123"), EncodingError);
  EXPECT_THROW(cb.category_index(Variable::POB, "31000"), EncodingError);
}

TEST(Encode, SumEqualsPresentVariables) {
  auto records = noi_counts({{"34000", 12}});
  for (auto& r : records) r.covariates.set(Variable::SEX, "M");
  records.front().covariates.set(Variable::SEX, "F");
  const auto cb = build_codebook(records, 10);
  const auto x = encode(record({{Variable::SEX, "F"}}), cb);
  EXPECT_EQ(std::accumulate(x.begin(), x.end(), 0.0), 1.0);
  const auto none = encode(Covariates{}, cb);
  EXPECT_EQ(std::accumulate(none.begin(), none.end(), 0.0), 0.0);
}

TEST(Codebook, SubsetRestrictsVariables) {
  const std::array<Variable, 1> only_sex{Variable::SEX};
  const auto cb = build_codebook(std::vector<ClaimRecord>{full_record()}, 1, only_sex);
  EXPECT_TRUE(cb.contains(Variable::SEX));
  EXPECT_FALSE(cb.contains(Variable::NOI));
  EXPECT_EQ(cb.input_count(), 2u);  // F and UNKNOWN
}
