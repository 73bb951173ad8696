#include <doctest.h>

#include "properties.hpp"

namespace {

void report(const props::Stats& st) {
  INFO("cases " << st.cases << ", skipped " << st.skipped << ", worst " << st.worst << ", first: " << st.first_failure);
  CHECK(st.cases >= 500);
  CHECK(st.failures == 0);
  CHECK(st.ok());
}

}  // namespace

TEST_CASE("property: duality sandwich") { report(props::duality_sandwich(500, 101)); }

TEST_CASE("property: Jensen for SOS-convex polynomials") { report(props::jensen(500, 202)); }

TEST_CASE("property: atom extraction roundtrip") { report(props::atom_roundtrip(500, 303)); }

TEST_CASE("property: pair and direct relaxations agree") { report(props::pair_vs_direct(500, 404)); }

TEST_CASE("property: qmod membership is monotone in the order") { report(props::qmod_monotone(500, 505)); }
