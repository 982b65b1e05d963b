#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "tpp/holt_laury.hpp"

using namespace tpp::holt_laury;

TEST_CASE("menu rows and expected-value gaps") {
  const long expected_gaps[10] = {2680, 1910, 1140, 370,   -400,
                                  -1170, -1940, -2710, -3480, -4250};
  for (int q = 1; q <= 10; ++q) {
    const LotteryPair pair = lottery_pair(q);
    CHECK(pair.question == q);
    CHECK(pair.left_high == 3750);
    CHECK(pair.left_low == 3550);
    CHECK(pair.right_high == 8000);
    CHECK(pair.right_low == 100);
    CHECK(pair.p_high() == doctest::Approx(q / 10.0));
    CHECK(lottery_ev_gap(q) == expected_gaps[q - 1]);
  }
  CHECK_THROWS_AS(lottery_pair(0), std::out_of_range);
  CHECK_THROWS_AS(lottery_pair(11), std::out_of_range);
}

TEST_CASE("expected-value maximizer switches at question five") {
  const ChoiceVector ev = expected_value_choices();
  for (int q = 1; q <= 10; ++q) {
    CHECK(ev[q - 1] == (q <= 4 ? Choice::left : Choice::right));
  }
  const RiskProfile profile = classify_risk(ev);
  CHECK(profile.cls == RiskClass::neutral);
  CHECK(profile.switch_point == 5);
}

TEST_CASE("choice-string parsing") {
  const ChoiceVector v = *parse_choices("LLLLRRRRRR");
  CHECK(v[0] == Choice::left);
  CHECK(v[4] == Choice::right);
  CHECK_FALSE(parse_choices("LLLL").has_value());
  CHECK_FALSE(parse_choices("LLLLRRRRRX").has_value());
  CHECK(parse_choices("llllrrrrrr").has_value());
}

TEST_CASE("risk classification from switch points") {
  auto classify = [](const char* s) { return classify_risk(*parse_choices(s)); };

  RiskProfile p = classify("RRRRRRRRRR");
  CHECK(p.cls == RiskClass::loving);
  CHECK(p.switch_point == 1);

  p = classify("LLLRRRRRRR");
  CHECK(p.cls == RiskClass::loving);
  CHECK(p.switch_point == 4);

  p = classify("LLLLRRRRRR");
  CHECK(p.cls == RiskClass::neutral);
  CHECK(p.switch_point == 5);

  p = classify("LLLLLRRRRR");
  CHECK(p.cls == RiskClass::averse);
  CHECK(p.switch_point == 6);

  p = classify("LLLLLLLLLR");
  CHECK(p.cls == RiskClass::averse);
  CHECK(p.switch_point == 10);

  // Reversal after the first right, or never choosing right at all.
  p = classify("LLLLLRLRRR");
  CHECK(p.cls == RiskClass::inconsistent);
  CHECK_FALSE(p.switch_point.has_value());
  CHECK(classify("LLLLLLLLLL").cls == RiskClass::inconsistent);
  CHECK(classify("RLRRRRRRRR").cls == RiskClass::inconsistent);
}

TEST_CASE("risk class labels") {
  CHECK(std::string(to_string(RiskClass::neutral)) == "Neutral");
  CHECK(std::string(to_string(RiskClass::averse)) == "Averse");
  CHECK(std::string(to_string(RiskClass::loving)) == "Loving");
  CHECK(std::string(to_string(RiskClass::inconsistent)) == "Inconsistent");
}

TEST_CASE("crra utility handles the log branch continuously") {
  CHECK(crra_utility(2.0, 0.0) == doctest::Approx(1.0));
  CHECK(crra_utility(2.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(crra_utility(2.0, 1.0 - 1e-12) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(crra_utility(2.0, 1.0 + 1e-12) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(crra_utility(1.0, 0.7) == doctest::Approx(0.0));
  CHECK_THROWS_AS(crra_utility(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(crra_utility(-1.0, 0.5), std::domain_error);
}

// Scan the gap on a dense grid and bracket each sign change; the bisection
// roots must land inside the brackets.
TEST_CASE("indifference roots agree with a grid scan") {
  for (int q = 1; q <= 10; ++q) {
    const double root = [&]() -> double {
      try {
        return indifference_root(q);
      } catch (const std::runtime_error&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    }();
    bool bracketed = false;
    const double lo = -10.0, hi = 10.0, step = 1e-3;
    double prev_r = lo;
    double prev_g = indifference_gap(q, lo);
    for (double r = lo + step; r <= hi + step / 2; r += step) {
      const double g = indifference_gap(q, r);
      if ((prev_g < 0) != (g < 0)) {
        CHECK(std::isfinite(root));
        CHECK(root >= prev_r - 1e-6);
        CHECK(root <= r + 1e-6);
        bracketed = true;
        break;
      }
      prev_r = r;
      prev_g = g;
    }
    if (!bracketed) CHECK(std::isnan(root));
  }
}

TEST_CASE("risk-neutral interval matches the reference band") {
  const CrraInterval band = crra_interval(5);
  CHECK(std::abs(band.lo - (-0.15)) < 0.01);
  CHECK(std::abs(band.hi - 0.15) < 0.01);
}

TEST_CASE("intervals tile the real line") {
  CHECK(crra_interval(1).lo == -std::numeric_limits<double>::infinity());
  CHECK(crra_interval(10).hi == std::numeric_limits<double>::infinity());
  for (int sp = 2; sp <= 10; ++sp) {
    const CrraInterval prev = crra_interval(sp - 1);
    const CrraInterval cur = crra_interval(sp);
    CHECK(prev.hi == cur.lo);  // shared bound, bitwise
    CHECK(cur.lo < cur.hi);
  }
  CHECK_THROWS_AS(crra_interval(0), std::out_of_range);
  CHECK_THROWS_AS(crra_interval(11), std::out_of_range);
}

TEST_CASE("interval bounds really are indifference points") {
  for (int sp = 2; sp <= 10; ++sp) {
    const double bound = crra_interval(sp).lo;
    CHECK(std::abs(indifference_gap(sp - 1, bound)) < 1e-2);
  }
}

TEST_CASE("menu csv") {
  std::ostringstream out;
  write_menu_csv(out);
  const std::string text = out.str();
  CHECK(text.find("question,p_high,left_high,left_low,right_high,right_low,ev_gap") == 0);
  CHECK(text.find("1,1/10,3750,3550,8000,100,2680") != std::string::npos);
  CHECK(text.find("10,10/10,3750,3550,8000,100,-4250") != std::string::npos);
}
