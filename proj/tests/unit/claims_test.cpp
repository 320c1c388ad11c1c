#include <sstream>

#include <gtest/gtest.h>

#include "claimnet/claims.hpp"
#include "claimnet/errors.hpp"

using namespace claimnet;

TEST(Dates, ParseAndFormat) {
  const auto d = parse_date("2000-02-29");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "2000-02-29");
  EXPECT_FALSE(parse_date("1999-02-29"));
  EXPECT_FALSE(parse_date("2000-13-01"));
  EXPECT_FALSE(parse_date("2000-1-01"));
  EXPECT_FALSE(parse_date("yesterday"));
}

TEST(Variables, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_variable("pob"), Variable::POB);
  EXPECT_EQ(parse_variable("Cpc"), Variable::CPC);
  EXPECT_FALSE(parse_variable("FOO"));
  for (const auto v : kAllVariables) EXPECT_EQ(parse_variable(to_string(v)), v);
}

TEST(ClaimsFile, RoundTripsExactly) {
  const std::string text =
      "noi,pob,soi,toa,age,sex,sic,occ,pay,cpc,duration_weeks,event,open_date\n"
      "34001,31000,11000,02100,41,M,2011,7311,612.5,E1A,3.1428571428571428,1,1999-03-04\n"
      ",21000,,,,F,,,,,0.1,0,2000-12-01\n";
  std::istringstream in(text);
  const auto records = read_claims(in);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].covariates.count(), 10u);
  EXPECT_EQ(records[1].covariates.count(), 2u);
  EXPECT_FALSE(records[1].event);
  EXPECT_DOUBLE_EQ(records[0].duration_weeks, 3.1428571428571428);
  std::ostringstream out;
  write_claims(out, records);
  std::istringstream again(out.str());
  EXPECT_EQ(read_claims(again), records);
}

TEST(ClaimsFile, ColumnsInAnyOrder) {
  std::istringstream in("event,open_date,duration_weeks,sex\nclosed,1999-01-01,2,F\nopen,1999-01-02,3,M\n");
  const auto records = read_claims(in);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_TRUE(records[0].event);
  EXPECT_FALSE(records[1].event);
  EXPECT_EQ(records[1].covariates.get(Variable::SEX), "M");
}

TEST(ClaimsFile, ErrorsCarryLineNumbers) {
  std::istringstream bad_duration("sex,duration_weeks,event,open_date\nM,1,1,1999-01-01\nM,-2,1,1999-01-01\n");
  try {
    read_claims(bad_duration);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream missing("sex,event,open_date\nM,1,1999-01-01\n");
  EXPECT_THROW(read_claims(missing), DataError);
  std::istringstream ragged("sex,duration_weeks,event,open_date\nM,1,1\n");
  EXPECT_THROW(read_claims(ragged), DataError);
}

TEST(ClaimsFile, ExtraColumnsAreIgnored) {
  std::istringstream in("claim_id,sex,duration_weeks,event,open_date\nA17,M,1,1,1999-01-01\n");
  const auto records = read_claims(in);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].covariates.count(), 1u);
}

TEST(ClaimsFile, ModellingExtractDropsZeroDurations) {
  std::vector<ClaimRecord> records(3);
  records[0].duration_weeks = 0.0;
  records[1].duration_weeks = 1.0;
  records[2].duration_weeks = 0.5;
  EXPECT_EQ(modelling_extract(records).size(), 2u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}
