#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "falsify/errors.hpp"

namespace falsify {

// Uniformly sampled multivariate signal. Immutable after construction;
// safe to share between threads.
class Trace {
public:
  Trace(double start_time, double dt, std::vector<std::string> names,
        std::vector<std::vector<double>> values)
      : start_time_(start_time), dt_(dt), names_(std::move(names)),
        values_(std::move(values)) {
    if (dt_ <= 0.0) throw NonPositiveDt();
    if (values_.empty()) throw Error("trace needs at least one sample");
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j])
          throw Error("duplicate signal name: " + names_[i]);
    for (const auto& row : values_) {
      if (row.size() != names_.size())
        throw Error("trace row width does not match signal count");
      for (double v : row)
        if (!std::isfinite(v)) throw Error("non-finite value in trace");
    }
  }

  double start_time() const { return start_time_; }
  double dt() const { return dt_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t sample_count() const { return values_.size(); }
  double duration() const { return dt_ * static_cast<double>(values_.size() - 1); }

  double time_at(std::size_t k) const {
    return start_time_ + dt_ * static_cast<double>(k);
  }

  std::size_t signal_index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw UnknownSignal(name);
    return static_cast<std::size_t>(it - names_.begin());
  }

  bool has_signal(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  double value(std::size_t sample, std::size_t signal) const {
    return values_[sample][signal];
  }

  const std::vector<double>& row(std::size_t sample) const {
    return values_[sample];
  }

  std::vector<double> column(std::size_t signal) const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& r : values_) out.push_back(r[signal]);
    return out;
  }

private:
  double start_time_;
  double dt_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
};

namespace detail {

// Number of grid points covering [0, duration] at spacing dt. The 1e-9
// slack absorbs quotient rounding when dt is not an exact binary fraction
// (30/0.01 lands just below 3000 in IEEE arithmetic).
inline std::size_t grid_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

}  // namespace detail

// A numeric field of a signal expression: a literal or a reference to a
// named search parameter.
struct ParamOrValue {
  ParamOrValue(double v) : value(v) {}                        // NOLINT
  ParamOrValue(std::string name) : param(std::move(name)) {}  // NOLINT

  double value = 0.0;
  std::string param;  // non-empty means parameter reference

  double resolve(const std::map<std::string, double>& bindings) const {
    if (param.empty()) return value;
    auto it = bindings.find(param);
    if (it == bindings.end()) throw UnboundParameter(param);
    return it->second;
  }
};

// One plant-input signal over one test-sequence step.
struct SignalExpression {
  enum class Kind { Constant, Ramp, Step, Sine };

  Kind kind = Kind::Constant;
  // Constant: a. Ramp: a=from, b=to. Step: a=before, b=after,
  // c=switch_time_fraction. Sine: a=offset, b=amplitude, c=period_seconds,
  // d=phase_radians.
  ParamOrValue a{0.0}, b{0.0}, c{0.0}, d{0.0};

  static SignalExpression constant(ParamOrValue v) {
    return {Kind::Constant, v, 0.0, 0.0, 0.0};
  }
  static SignalExpression ramp(ParamOrValue from, ParamOrValue to) {
    return {Kind::Ramp, from, to, 0.0, 0.0};
  }
  static SignalExpression step(ParamOrValue before, ParamOrValue after,
                               ParamOrValue frac) {
    return {Kind::Step, before, after, frac, 0.0};
  }
  static SignalExpression sine(ParamOrValue offset, ParamOrValue amplitude,
                               ParamOrValue period, ParamOrValue phase) {
    return {Kind::Sine, offset, amplitude, period, phase};
  }

  // Names of all parameters referenced by this expression.
  std::vector<std::string> referenced_params() const {
    std::vector<std::string> out;
    for (const ParamOrValue* p : {&a, &b, &c, &d})
      if (!p->param.empty()) out.push_back(p->param);
    return out;
  }
};

// Samples an expression on the uniform grid t0, t0+dt, ..., t0+floor(duration/dt)*dt.
// Ramp interpolates over the window [t0, t0+duration]; Step switches at
// t0 + frac*duration; Sine phase is referenced to t0.
inline std::vector<double> sample_expression(
    const SignalExpression& expr, const std::map<std::string, double>& bindings,
    double t0, double duration, double dt) {
  if (dt <= 0.0) throw NonPositiveDt();
  if (duration < dt) throw Error("duration must be >= dt");
  std::size_t n = detail::grid_count(duration, dt);
  std::vector<double> out;
  out.reserve(n);

  switch (expr.kind) {
    case SignalExpression::Kind::Constant: {
      double v = expr.a.resolve(bindings);
      out.assign(n, v);
      break;
    }
    case SignalExpression::Kind::Ramp: {
      double from = expr.a.resolve(bindings);
      double to = expr.b.resolve(bindings);
      for (std::size_t k = 0; k < n; ++k) {
        double frac = std::min(1.0, (static_cast<double>(k) * dt) / duration);
        out.push_back(from + (to - from) * frac);
      }
      break;
    }
    case SignalExpression::Kind::Step: {
      double before = expr.a.resolve(bindings);
      double after = expr.b.resolve(bindings);
      double frac = expr.c.resolve(bindings);
      double switch_t = frac * duration;
      for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) * dt;
        out.push_back(t < switch_t ? before : after);
      }
      break;
    }
    case SignalExpression::Kind::Sine: {
      double offset = expr.a.resolve(bindings);
      double amplitude = expr.b.resolve(bindings);
      double period = expr.c.resolve(bindings);
      double phase = expr.d.resolve(bindings);
      if (period <= 0.0) throw Error("sine period must be > 0");
      const double two_pi = 2.0 * 3.14159265358979323846;
      for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) * dt;
        out.push_back(offset + amplitude * std::sin(two_pi * t / period + phase));
      }
      break;
    }
  }
  (void)t0;  // grid is relative; t0 only names the window origin
  return out;
}

// Concatenates traces end to end. Adjacent traces share their boundary
// sample: the first sample of every trace after the first is dropped.
inline Trace concat(const std::vector<Trace>& traces) {
  if (traces.empty()) throw Error("concat of empty trace list");
  const Trace& first = traces.front();
  std::vector<std::vector<double>> values;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Trace& t = traces[i];
    if (t.names() != first.names())
      throw MismatchedSignals("concat: traces carry different signals");
    if (t.dt() != first.dt())
      throw MismatchedDt("concat: traces have different dt");
    for (std::size_t k = (i == 0 ? 0 : 1); k < t.sample_count(); ++k)
      values.push_back(t.row(k));
  }
  return Trace(first.start_time(), first.dt(), first.names(), std::move(values));
}

namespace detail {

// Shortest decimal rendering that round-trips a double (17 significant digits).
inline std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV rendering: header `time,<name1>,...`, LF line endings, values at
// full precision so read_csv(write_csv(t)) == t exactly.
inline std::string write_csv(const Trace& trace) {
  std::string out = "time";
  for (const auto& n : trace.names()) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (std::size_t k = 0; k < trace.sample_count(); ++k) {
    out += detail::format_full(trace.time_at(k));
    for (std::size_t j = 0; j < trace.names().size(); ++j) {
      out += ',';
      out += detail::format_full(trace.value(k, j));
    }
    out += '\n';
  }
  return out;
}

inline Trace read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "time")
    throw ParseError("first column must be `time`", 1, 1);
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::vector<double> times;
  std::vector<std::vector<double>> values;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      ++col;
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell `" + cell + "`", row_no, col);
      }
      if (pos != cell.size())
        throw ParseError("trailing characters in cell `" + cell + "`", row_no, col);
      row.push_back(v);
    }
    if (row.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) +
                           " cells, found " + std::to_string(row.size()),
                       row_no, row.size());
    times.push_back(row[0]);
    values.emplace_back(row.begin() + 1, row.end());
  }
  if (values.empty()) throw ParseError("no data rows", 2, 1);

  double start = times[0];
  double dt = 1.0;
  if (values.size() > 1) {
    double d0 = times[1] - times[0];
    if (d0 <= 0.0)
      throw ParseError("time column must be strictly increasing", 3, 1);
    // times[k] was rendered as start + dt*k; the subtraction above can be
    // an ulp off dt when start != 0. Probe the neighborhood for the dt
    // that reproduces the whole column.
    auto matches_all = [&](double d) {
      for (std::size_t k = 1; k < times.size(); ++k)
        if (start + d * static_cast<double>(k) != times[k]) return false;
      return true;
    };
    dt = d0;
    if (!matches_all(dt)) {
      // The subtraction can be many ulps off when start dominates dt.
      // start + d*K is monotone in d, so binary-search the bit patterns
      // for a d reproducing the last row, then verify the whole column.
      auto bits = [](double x) {
        std::uint64_t b;
        std::memcpy(&b, &x, sizeof(b));
        return b;
      };
      auto from_bits = [](std::uint64_t b) {
        double x;
        std::memcpy(&x, &b, sizeof(x));
        return x;
      };
      double K = static_cast<double>(times.size() - 1);
      double target = times.back();
      std::uint64_t lo = bits(d0 * 0.999999), hi = bits(d0 * 1.000001);
      while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (start + from_bits(mid) * K < target) lo = mid + 1;
        else hi = mid;
      }
      // walk the plateau where the last row matches
      for (std::uint64_t b = lo; start + from_bits(b) * K == target; ++b)
        if (matches_all(from_bits(b))) { dt = from_bits(b); break; }
      // d0 stands when the column is irregular and nothing matches
    }
  }
  return Trace(start, dt, std::move(names), std::move(values));
}

}  // namespace falsify
