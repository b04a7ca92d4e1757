#include <doctest.h>

#include <cmath>
#include <set>

#include "falsify/plants.hpp"
#include "falsify/rng.hpp"

using namespace falsify;

namespace {

Trace constant_inputs(const std::vector<std::string>& names,
                      const std::vector<double>& values, double duration,
                      double dt) {
  std::size_t n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  std::vector<std::vector<double>> rows(n, values);
  return Trace(0, dt, names, rows);
}

// Reference integration at a much finer step, sampled back onto the
// coarse grid. Plain RK4 written out independently of simulate().
double refined_final_speed(double throttle, double duration, double fine_dt) {
  PlantModel p = builtin::cruise_control();
  double v = 0.0;
  auto deriv = [&](double x) {
    return p.constants.at("drive_gain") * throttle *
               (1.0 - x / p.constants.at("v_max")) -
           p.constants.at("damping") * x;
  };
  std::size_t steps = static_cast<std::size_t>(std::llround(duration / fine_dt));
  for (std::size_t i = 0; i < steps; ++i) {
    double k1 = deriv(v);
    double k2 = deriv(v + 0.5 * fine_dt * k1);
    double k3 = deriv(v + 0.5 * fine_dt * k2);
    double k4 = deriv(v + fine_dt * k3);
    v += fine_dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

}  // namespace

TEST_CASE("registry lists the three built-ins with unique names") {
  const auto& plants = list_plants();
  REQUIRE(plants.size() == 3);
  std::set<std::string> names;
  for (const auto& p : plants) {
    names.insert(p.name);
    CHECK(p.default_dt > 0);
    // input/output name sets disjoint
    for (const auto& in : p.input_names)
      for (const auto& out : p.output_names) CHECK(in != out);
  }
  CHECK(names == std::set<std::string>{"cruise_control", "water_tank", "ridge"});
}

TEST_CASE("registry descriptors match the documented fixtures") {
  PlantModel cc = get_plant("cruise_control");
  CHECK(cc.input_names == std::vector<std::string>{"throttle", "brake"});
  CHECK(cc.output_names == std::vector<std::string>{"speed"});
  PlantModel wt = get_plant("water_tank");
  CHECK(wt.input_names == std::vector<std::string>{"inflow"});
  PlantModel r = get_plant("ridge");
  CHECK(r.input_names == std::vector<std::string>{"x1", "x2"});
  CHECK_THROWS_AS(get_plant("nonexistent"), ConfigError);
  CHECK_THROWS_AS(get_plant("ridge", {{"no_such_constant", 1.0}}), ConfigError);
}

TEST_CASE("cruise control equilibrium: zero input, zero speed") {
  PlantModel p = get_plant("cruise_control");
  Trace out = simulate(
      p, constant_inputs({"throttle", "brake"}, {0.0, 0.0}, 10.0, 0.01));
  for (std::size_t k = 0; k < out.sample_count(); ++k)
    CHECK(out.value(k, out.signal_index("speed")) == 0.0);
}

TEST_CASE("water tank equilibrium: closed valve, empty tank") {
  PlantModel p = get_plant("water_tank");
  Trace out = simulate(p, constant_inputs({"inflow"}, {0.0}, 10.0, 0.01));
  for (std::size_t k = 0; k < out.sample_count(); ++k)
    CHECK(out.value(k, out.signal_index("level")) == 0.0);
}

TEST_CASE("cruise control full throttle approaches steady state; refined-step oracle") {
  PlantModel p = get_plant("cruise_control");
  double dt = 0.01;
  Trace out = simulate(
      p, constant_inputs({"throttle", "brake"}, {1.0, 0.0}, 200.0, dt));
  double final_speed =
      out.value(out.sample_count() - 1, out.signal_index("speed"));
  double reference = refined_final_speed(1.0, 200.0, dt / 100.0);
  CHECK(std::fabs(final_speed - reference) < 0.1);
  // analytic steady state of the constants: drive_gain/(damping+drive_gain/v_max)
  CHECK(final_speed == doctest::Approx(125.0).epsilon(1e-3));
}

TEST_CASE("simulate echoes inputs and preserves the grid") {
  PlantModel p = get_plant("cruise_control");
  Trace in = constant_inputs({"throttle", "brake"}, {0.7, 0.1}, 5.0, 0.05);
  Trace out = simulate(p, in);
  CHECK(out.dt() == in.dt());
  CHECK(out.sample_count() == in.sample_count());
  CHECK(out.names() ==
        std::vector<std::string>{"speed", "throttle", "brake"});
  for (std::size_t k = 0; k < out.sample_count(); ++k) {
    CHECK(out.value(k, 1) == 0.7);
    CHECK(out.value(k, 2) == 0.1);
  }
}

TEST_CASE("simulate is deterministic") {
  PlantModel p = get_plant("water_tank");
  Trace in = constant_inputs({"inflow"}, {0.8}, 20.0, 0.01);
  Trace a = simulate(p, in);
  Trace b = simulate(p, in);
  for (std::size_t k = 0; k < a.sample_count(); ++k)
    CHECK(a.value(k, 0) == b.value(k, 0));
}

TEST_CASE("simulate rejects mismatched input signals") {
  PlantModel p = get_plant("cruise_control");
  Trace wrong = constant_inputs({"throttle"}, {1.0}, 5.0, 0.01);
  CHECK_THROWS_AS(simulate(p, wrong), SignalMismatch);
}

TEST_CASE("numerical blowup reports the offending time") {
  PlantModel p = get_plant("cruise_control");
  // a destabilizing damping makes the state explode
  p.constants["damping"] = -50.0;
  Trace in = constant_inputs({"throttle", "brake"}, {1.0, 0.0}, 30.0, 0.1);
  CHECK_THROWS_AS(simulate(p, in), NumericalBlowup);
}

TEST_CASE("cruise control monotonicity: pointwise larger throttle, larger speed") {
  PlantModel p = get_plant("cruise_control");
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 201;
    std::vector<std::vector<double>> lo_rows, hi_rows;
    for (std::size_t k = 0; k < n; ++k) {
      double lo = rng.uniform(0, 1);
      double hi = lo + rng.uniform(0, 1.0 - lo);
      lo_rows.push_back({lo, 0.0});
      hi_rows.push_back({hi, 0.0});
    }
    Trace lo_out = simulate(p, Trace(0, 0.1, {"throttle", "brake"}, lo_rows));
    Trace hi_out = simulate(p, Trace(0, 0.1, {"throttle", "brake"}, hi_rows));
    for (std::size_t k = 0; k < n; ++k)
      CHECK(hi_out.value(k, 0) >= lo_out.value(k, 0));
  }
}

TEST_CASE("ridge gap is negative only inside the band") {
  PlantModel p = get_plant("ridge");
  auto gap = [&](double x1, double x2) {
    Trace out = simulate(p, constant_inputs({"x1", "x2"}, {x1, x2}, 1.0, 0.5));
    return out.value(0, 0);
  };
  CHECK(gap(0.7, 0.35) < 0.0);
  CHECK(gap(0.705, 0.345) < 0.0);
  CHECK(gap(0.72, 0.35) > 0.0);
  CHECK(gap(0.5, 0.5) > 0.0);
}
