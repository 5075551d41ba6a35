// A short tour of the library: one computation from each module.

#include <cstdio>
#include <random>

#include "divark/ando.hpp"
#include "divark/innerpair.hpp"
#include "divark/pick.hpp"

using namespace divark;

int main() {
  // The Neil parabola z^3 = w^2, image of the Blaschke pair (z^2, z^3).
  const BlaschkeProduct z2({0.0, 0.0});
  const BlaschkeProduct z3({0.0, 0.0, 0.0});
  const VarietyRealization neil(colligation_from_inner_pair(z2, z3));
  std::mt19937_64 rng(7);
  std::printf("Neil parabola: max |det(Psi - w)| over 100 image points %.2e\n",
              verify_pair_on_variety(z2, z3, neil, 100, rng));
  const auto audit = audit_distinguished(neil, 16, 256);
  std::printf("  distinguished: %s (boundary deviation %.1e)\n",
              audit.is_distinguished ? "yes" : "no", audit.worst_boundary_deviation);
  std::printf("  zeroes of z^3: %ld, of w^2: %ld, of zw: %ld\n",
              count_zeroes(neil, RationalInner::monomial(3, 0), 256),
              count_zeroes(neil, RationalInner::monomial(0, 2), 256),
              count_zeroes(neil, RationalInner::monomial(1, 1), 256));

  // A commuting pair and the sharpened von Neumann bound for p = (z + w)/2.
  CMatrix t(2, 2);
  t << 0.0, 0.0, 0.0, 0.5;
  const BiPoly mean({{{1, 0}, 0.5}, {{0, 1}, 0.5}});
  const auto cert = certify(CommutingPair(t, t), mean, 512);
  std::printf("Commuting pair: ||p(T1,T2)|| = %.4f <= sup over V %.4f <= sup over torus %.4f\n",
              cert.lhs, cert.rhs_variety, cert.rhs_bidisk);

  // An extremal Pick problem and the values forced on its uniqueness variety.
  const PickProblem prob({{0.0, 0.0}, {0.5, 0.5}}, {0.0, 0.5});
  std::printf("Pick problem: minimal norm %.8f\n", extremal_rho(prob));
  const auto ak = find_active_kernel(prob);
  const auto ek = extend_kernel(ak, prob);
  for (double s : {0.1, 0.3, 0.5, 0.7}) {
    const Complex v = uniqueness_value(ek, ak.gamma, {s, s}).value;
    std::printf("  every interpolant of norm 1 maps (%.1f, %.1f) to %.10f%+.1ei\n", s, s,
                v.real(), v.imag());
  }
  return 0;
}
