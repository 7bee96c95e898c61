#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "smilecal/error.hpp"
#include "smilecal/market_data.hpp"

using namespace smilecal;

TEST_SUITE("market_data") {

TEST_CASE("dates parse in all three table styles") {
  CHECK(parse_date("21/11/2011") == Date{std::chrono::year{2011}, std::chrono::month{11}, std::chrono::day{21}});
  CHECK(parse_date("21.05.2012") == parse_date("21/05/2012"));
  CHECK(parse_date("21-05-12") == parse_date("21/05/2012"));
  CHECK_THROWS_AS(parse_date("31/02/2012"), ParseError);
  CHECK_THROWS_AS(parse_date("2012-05-21"), ParseError);
  CHECK(format_date(parse_date("01.02.2013")) == "01/02/2013");
  CHECK(year_fraction(parse_date("21/11/2011"), parse_date("21/11/2012")) == doctest::Approx(366.0 / 365.0));
  CHECK(add_months(parse_date("31/08/2012"), 6) == parse_date("28/02/2013"));
}

TEST_CASE("curve rows are stored verbatim") {
  const auto& c = testdata::curve();
  CHECK(c.anchor() == parse_date("21/11/2011"));
  CHECK(c.points().size() == 27);
  CHECK(c.discount_factor(parse_date("21/11/2011")) == 1.0);
  CHECK(c.discount_factor(parse_date("23/11/2016")) == 0.91144251116);
  for (const auto& p : c.points()) CHECK(c.discount_factor(p.date) == p.df);
  CHECK(c.warnings().empty());
}

TEST_CASE("log-linear interpolation gives the geometric mean at a midpoint") {
  const auto c = parse_discount_curve("01/01/2020,1\n11/01/2020,0.99\n21/01/2020,0.97\n");
  const double mid = c.discount_factor(year_fraction(c.anchor(), parse_date("16/01/2020")));
  CHECK(mid == doctest::Approx(std::sqrt(0.99 * 0.97)).epsilon(1e-14));
  CHECK_THROWS_AS(c.discount_factor(parse_date("22/01/2020")), DomainError);
  CHECK_THROWS_AS(c.discount_factor(parse_date("31/12/2019")), DomainError);
}

TEST_CASE("curve validation") {
  CHECK_THROWS_WITH_AS(parse_discount_curve(""), "no curve points", ParseError);
  CHECK_THROWS_AS(parse_discount_curve("01/01/2020,1\n01/01/2020,0.99\n"), Error);
  CHECK_THROWS_AS(parse_discount_curve("01/01/2020,1\n02/01/2020,1.2\n"), Error);
  CHECK_THROWS_AS(parse_discount_curve("01/01/2020,0.98\n02/01/2020,0.97\n"), Error);
  CHECK_THROWS_AS(parse_discount_curve("01/01/2020,1\n02/01/2020,abc\n"), ParseError);
  const auto up = parse_discount_curve("01/01/2020,1\n02/01/2020,0.98\n03/01/2020,0.99\n");
  CHECK(up.warnings().size() == 1);
}

TEST_CASE("bootstrap on a two-node curve") {
  const auto c = parse_discount_curve("01/01/2020,1\n01/07/2020,0.99\n01/01/2021,0.98\n");
  const std::vector<Date> dates{parse_date("01/07/2020"), parse_date("01/01/2021")};
  const auto t = bootstrap_forwards(c, dates);
  REQUIRE(t.size() == 1);
  const double tau = 184.0 / 365.0;
  CHECK(t.accruals[0] == doctest::Approx(tau));
  CHECK(t.forwards[0] == doctest::Approx((0.99 / 0.98 - 1.0) / tau).epsilon(1e-14));
  // With an exact half-year accrual the hand value is 0.0204082.
  CHECK((0.99 / 0.98 - 1.0) / 0.5 == doctest::Approx(0.0204082).epsilon(1e-6));
}

TEST_CASE("flat curve gives zero forwards") {
  const auto c = parse_discount_curve("01/01/2020,1\n01/01/2030,1\n");
  const auto t = bootstrap_forwards(c, semiannual_schedule(parse_date("01/07/2020"), 4));
  for (double f : t.forwards) CHECK(f == 0.0);
}

TEST_CASE("market tenor: 13 forwards in (0, 0.10) and exact recompounding") {
  const auto& t = testdata::tenor();
  REQUIRE(t.size() == 13);
  for (double f : t.forwards) {
    CHECK(f > 0.0);
    CHECK(f < 0.10);
  }
  double growth = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) growth *= 1.0 + t.accruals[i] * t.forwards[i];
  CHECK(std::abs(growth * t.discounts.back() / t.discounts.front() - 1.0) < 1e-12);
  CHECK(t.dates.back() == parse_date("21/11/2018"));
  // Frozen from the first bootstrap run.
  CHECK(t.forwards[0] == doctest::Approx(0.012134).epsilon(1e-4));
  CHECK(t.forwards[12] == doctest::Approx(0.031318).epsilon(1e-4));
}

TEST_CASE("strike from log-moneyness") {
  CHECK(strike_from_moneyness(0.03, 0.0) == 0.03);
  CHECK(strike_from_moneyness(0.03, -0.40) == doctest::Approx(0.0201096).epsilon(1e-6));
  CHECK(strike_from_moneyness(0.03, 0.80) == doctest::Approx(0.0667662).epsilon(1e-6));
  double prev = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const double s = strike_from_moneyness(0.02, 0.1 * k);
    CHECK(s > prev);
    prev = s;
  }
  CHECK_THROWS_AS(strike_from_moneyness(0.0, 0.1), DomainError);
}

TEST_CASE("smile tables") {
  const auto& c = testdata::caplets();
  REQUIRE(c.rows.size() == 13);
  REQUIRE(c.moneyness.size() == 9);
  const auto atm = c.column(0.0);
  REQUIRE(atm);
  CHECK(c.rows[0].vols[*atm] == doctest::Approx(0.7229).epsilon(1e-14));
  const auto& s = testdata::swaptions();
  REQUIRE(s.rows.size() == 20);
  CHECK(s.rows[0].expiry == parse_date("21/05/2012"));
  CHECK(s.rows[0].length_years == 1.0);
  CHECK(s.rows[0].vols[*s.column(0.0)] == doctest::Approx(0.7040).epsilon(1e-14));
  CHECK(c.moneyness.front() == doctest::Approx(-0.8));

  CHECK_THROWS_AS(parse_smile_surface("fixing,0%,10%\n21-05-12,50%,-3%\n", SmileKind::caplet), ParseError);
  CHECK_THROWS_AS(parse_smile_surface("fixing,0%,10%\n21-05-12,50%\n", SmileKind::caplet), ParseError);
  CHECK_THROWS_AS(parse_smile_surface("fixing,10%,0%\n21-05-12,50%,40%\n", SmileKind::caplet), ParseError);
}

TEST_CASE("missing files name the path") {
  CHECK_THROWS_WITH_AS(load_discount_curve("/nonexistent/curve.csv"), "cannot open /nonexistent/curve.csv",
                       ConfigError);
}

}
