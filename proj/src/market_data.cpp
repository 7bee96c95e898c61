#include "smilecal/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "smilecal/error.hpp"

namespace smilecal {

namespace {

using csv::content_lines;
using csv::parse_number;
using csv::split_fields;
using csv::trim;

// "72.29%" -> 0.7229, "0.7229" -> 0.7229
double parse_quote(std::string_view text, std::size_t line) {
  if (!text.empty() && text.back() == '%') return parse_number(trim(text.substr(0, text.size() - 1)), line) / 100.0;
  return parse_number(text, line);
}

bool looks_like_date(std::string_view text) {
  try {
    parse_date(text);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace

DiscountCurve::DiscountCurve(std::vector<CurvePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ParseError("no curve points");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto& p = points_[k];
    if (!(p.df > 0.0 && p.df <= 1.0)) {
      throw ParseError("discount factor out of (0,1] at " + format_date(p.date));
    }
    if (k > 0) {
      if (std::chrono::sys_days{p.date} <= std::chrono::sys_days{points_[k - 1].date}) {
        throw ParseError("curve dates not strictly increasing at " + format_date(p.date));
      }
      if (p.df > points_[k - 1].df) {
        warnings_.push_back("discount factor increases at " + format_date(p.date));
      }
    }
    times_.push_back(year_fraction(points_.front().date, p.date));
    log_dfs_.push_back(std::log(p.df));
  }
  if (points_.front().df != 1.0) throw ParseError("discount factor at the anchor date must be 1");
}

double DiscountCurve::discount_factor(const Date& date) const {
  const auto days = std::chrono::sys_days{date};
  if (days < std::chrono::sys_days{anchor()} || days > std::chrono::sys_days{last_date()}) {
    throw DomainError("date " + format_date(date) + " outside curve range");
  }
  auto it = std::lower_bound(points_.begin(), points_.end(), days,
                             [](const CurvePoint& p, std::chrono::sys_days d) { return std::chrono::sys_days{p.date} < d; });
  if (std::chrono::sys_days{it->date} == days) return it->df;
  return discount_factor(year_fraction(anchor(), date));
}

double DiscountCurve::discount_factor(double t) const {
  if (t < 0.0 || t > times_.back()) throw DomainError("time outside curve range");
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin());
  if (times_[k] == t) return points_[k].df;
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return std::exp((1.0 - w) * log_dfs_[k - 1] + w * log_dfs_[k]);
}

DiscountCurve parse_discount_curve(std::string_view text) {
  std::vector<CurvePoint> points;
  for (const auto& [number, line] : content_lines(text)) {
    const auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw ParseError("line " + std::to_string(number) + ": expected 'date,df'");
    }
    if (points.empty() && !looks_like_date(fields[0])) continue;  // header
    points.push_back({parse_date(fields[0]), parse_number(fields[1], number)});
  }
  return DiscountCurve(std::move(points));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

DiscountCurve load_discount_curve(const std::filesystem::path& path) {
  return parse_discount_curve(read_text_file(path));
}

void TenorStructure::validate() const {
  const auto m = forwards.size();
  if (m == 0) throw ConfigError("tenor structure needs at least one forward");
  if (times.size() != m + 1 || accruals.size() != m || discounts.size() != m + 1) {
    throw ConfigError("tenor structure has inconsistent sizes");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(times[i + 1] > times[i])) throw ConfigError("tenor times must be strictly increasing");
    if (!(accruals[i] > 0.0)) throw ConfigError("accruals must be positive");
    if (!std::isfinite(forwards[i]) || !(forwards[i] > -1.0 / accruals[i])) {
      throw ConfigError("forward rate out of range");
    }
  }
}

TenorStructure bootstrap_forwards(const DiscountCurve& curve, std::span<const Date> dates) {
  if (dates.size() < 2) throw ConfigError("need at least one reset date and a payment date");
  TenorStructure tenor;
  tenor.dates.assign(dates.begin(), dates.end());
  for (const auto& d : dates) {
    tenor.times.push_back(year_fraction(curve.anchor(), d));
    tenor.discounts.push_back(curve.discount_factor(d));
  }
  for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
    const double tau = year_fraction(dates[i], dates[i + 1]);
    tenor.accruals.push_back(tau);
    tenor.forwards.push_back((tenor.discounts[i] / tenor.discounts[i + 1] - 1.0) / tau);
  }
  tenor.validate();
  return tenor;
}

std::vector<Date> semiannual_schedule(const Date& first_reset, std::size_t count) {
  std::vector<Date> dates;
  for (std::size_t k = 0; k <= count; ++k) dates.push_back(add_months(first_reset, static_cast<int>(6 * k)));
  return dates;
}

TenorStructure tenor_from_caplets(const DiscountCurve& curve, const SmileSurface& caplets) {
  if (caplets.rows.empty()) throw ConfigError("caplet surface has no rows");
  const auto dates = semiannual_schedule(caplets.rows.front().expiry, caplets.rows.size());
  for (std::size_t i = 0; i < caplets.rows.size(); ++i) {
    if (caplets.rows[i].expiry != dates[i]) {
      throw ConfigError("caplet fixing " + caplets.rows[i].label + " is not on the semiannual grid starting " +
                        format_date(dates.front()));
    }
  }
  return bootstrap_forwards(curve, dates);
}

double strike_from_moneyness(double f0, double moneyness) {
  if (!(f0 > 0.0)) throw DomainError("moneyness needs a positive forward");
  return f0 * std::exp(moneyness);
}

std::optional<std::size_t> SmileSurface::column(double m) const {
  for (std::size_t k = 0; k < moneyness.size(); ++k) {
    if (std::abs(moneyness[k] - m) < 1e-12) return k;
  }
  return std::nullopt;
}

SmileSurface parse_smile_surface(std::string_view text, SmileKind kind) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("empty smile file");

  const std::size_t label_columns = kind == SmileKind::caplet ? 1 : 2;
  SmileSurface surface;
  surface.kind = kind;

  const auto header = split_fields(lines.front().second);
  if (header.size() <= label_columns) throw ParseError("smile header has no moneyness columns");
  for (std::size_t k = label_columns; k < header.size(); ++k) {
    const double m = parse_quote(header[k], lines.front().first);
    if (!surface.moneyness.empty() && !(m > surface.moneyness.back())) {
      throw ParseError("moneyness grid must be strictly increasing");
    }
    surface.moneyness.push_back(m);
  }

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, line] = lines[r];
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(number) + ": expected " + std::to_string(header.size()) + " fields");
    }
    SmileRow row;
    if (kind == SmileKind::caplet) {
      row.expiry = parse_date(fields[0]);
      row.label = std::string(fields[0]);
    } else {
      auto length = fields[0];
      if (!length.empty() && (length.back() == 'Y' || length.back() == 'y')) length.remove_suffix(1);
      row.length_years = parse_number(length, number);
      if (!(row.length_years > 0.0)) throw ParseError("line " + std::to_string(number) + ": swap length must be positive");
      row.expiry = parse_date(fields[1]);
      row.label = std::string(fields[1]) + " x " + std::string(fields[0]);
    }
    for (std::size_t k = label_columns; k < fields.size(); ++k) {
      const double vol = parse_quote(fields[k], number);
      if (!(vol > 0.0)) throw ParseError("line " + std::to_string(number) + ": volatility must be positive");
      row.vols.push_back(vol);
    }
    surface.rows.push_back(std::move(row));
  }
  if (surface.rows.empty()) throw ParseError("smile file has no quote rows");
  return surface;
}

SmileSurface load_smile_surface(const std::filesystem::path& path, SmileKind kind) {
  return parse_smile_surface(read_text_file(path), kind);
}

}  // namespace smilecal
