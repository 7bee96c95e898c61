#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smilecal/dates.hpp"

namespace smilecal {

struct CurvePoint {
  Date date;
  double df;
};

/// Discount factors P(0,t) on dated nodes, log-linear between nodes.
/// Immutable once built.
class DiscountCurve {
 public:
  explicit DiscountCurve(std::vector<CurvePoint> points);

  const Date& anchor() const { return points_.front().date; }
  const Date& last_date() const { return points_.back().date; }
  std::span<const CurvePoint> points() const { return points_; }

  /// Non-fatal findings from construction (e.g. a discount factor that increases).
  const std::vector<std::string>& warnings() const { return warnings_; }

  double discount_factor(const Date& date) const;
  /// `t` is an ACT/365 year fraction from the anchor.
  double discount_factor(double t) const;

 private:
  std::vector<CurvePoint> points_;
  std::vector<double> times_;
  std::vector<double> log_dfs_;
  std::vector<std::string> warnings_;
};

DiscountCurve parse_discount_curve(std::string_view text);
DiscountCurve load_discount_curve(const std::filesystem::path& path);

/// Forward rates F_i(0) on a tenor grid. Forward i fixes at times[i] and pays
/// at times[i + 1]; all times are ACT/365 year fractions from the curve anchor.
struct TenorStructure {
  std::vector<Date> dates;          // M + 1 dates: resets then the final payment
  std::vector<double> times;        // M + 1
  std::vector<double> accruals;     // M
  std::vector<double> forwards;     // M
  std::vector<double> discounts;    // M + 1, P(0, times[k])

  std::size_t size() const { return forwards.size(); }
  double reset_time(std::size_t i) const { return times[i]; }
  double payment_time(std::size_t i) const { return times[i + 1]; }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// `dates` holds the reset dates followed by the final payment date.
TenorStructure bootstrap_forwards(const DiscountCurve& curve, std::span<const Date> dates);

/// `count` consecutive six-month periods starting at `first_reset`; returns count + 1 dates.
std::vector<Date> semiannual_schedule(const Date& first_reset, std::size_t count);

/// Log-moneyness convention: K = f0 * exp(m).
double strike_from_moneyness(double f0, double moneyness);

enum class SmileKind { caplet, swaption };

struct SmileRow {
  std::string label;
  Date expiry;
  double length_years = 0.0;   // swaptions only
  std::optional<double> rate;  // forward or swap rate, attached after bootstrapping
  std::vector<double> vols;    // decimals, one per moneyness column
};

struct SmileSurface {
  SmileKind kind = SmileKind::caplet;
  std::vector<double> moneyness;  // log-moneyness, strictly increasing
  std::vector<SmileRow> rows;

  /// Index of `m` in the moneyness grid, or nullopt.
  std::optional<std::size_t> column(double m) const;
};

SmileSurface parse_smile_surface(std::string_view text, SmileKind kind);
SmileSurface load_smile_surface(const std::filesystem::path& path, SmileKind kind);

/// Semiannual tenor whose resets are the caplet fixing dates; the last period ends six
/// months after the last fixing. Throws ConfigError if the fixings are not semiannual.
TenorStructure tenor_from_caplets(const DiscountCurve& curve, const SmileSurface& caplets);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace smilecal
