#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "property_suite.hpp"

using namespace adq;

namespace {

void expect(const props::PropertyResult& r) {
  INFO(r.name << ": " << r.detail);
  CHECK(r.value <= r.bound);
  CHECK(r.pass);
}

}  // namespace

TEST_CASE("covariance on three spaces") { expect(props::covariance()); }

TEST_CASE("hermiticity and locality of quantizations") { expect(props::hermiticity_locality()); }

TEST_CASE("Chern integrality and plaquette agreement on random symbols") { expect(props::random_chern()); }

TEST_CASE("cup product on T2 x T2") { expect(props::cup_product()); }

TEST_CASE("orientation reversal flips loop values") { expect(props::orientation()); }

TEST_CASE("lattice invariants do not depend on t") {
  auto tc = props::t_constancy();
  expect(tc.result);
  REQUIRE(tc.corner.size() == 3);
  for (auto& row : tc.corner) CHECK(row.lattice_side == 1.0);
  for (auto& row : tc.interface) CHECK(std::abs(row.difference) <= 0.05);
}

TEST_CASE("sphere pairing equals the bound-state count") {
  ExperimentConfig c;
  c.experiment = "point-defect";
  RunReport r = run_point_defect(c);
  for (const std::string tag : {"d1n1", "d2n2"}) {
    double sphere = -1, index = -2;
    for (auto& a : r.assertions) {
      if (a.name == tag + "_sphere_pairing_magnitude") sphere = std::lround(a.value);
      if (a.name == tag + "_zero_mode_index_magnitude") index = a.value;
    }
    INFO(tag);
    CHECK(sphere == index);
  }
  CHECK(r.all_pass());
}
