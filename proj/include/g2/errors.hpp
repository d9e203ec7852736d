#pragma once

#include <stdexcept>
#include <string>

namespace g2 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define G2_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(what) {}     \
  };

G2_DEFINE_ERROR(DegreeOverflow)
G2_DEFINE_ERROR(DegreeUnderflow)
G2_DEFINE_ERROR(DegreeMismatch)
G2_DEFINE_ERROR(UnsupportedDegree)
G2_DEFINE_ERROR(NotPositiveDefinite)
G2_DEFINE_ERROR(NearDegenerate)
G2_DEFINE_ERROR(HasSevenComponent)
G2_DEFINE_ERROR(StepLeavesPositiveCone)
G2_DEFINE_ERROR(DegenerateHessian)
G2_DEFINE_ERROR(DimensionMismatch)
G2_DEFINE_ERROR(NonIntegralCurvature)
G2_DEFINE_ERROR(NewtonDiverged)
G2_DEFINE_ERROR(SingularLinearization)
G2_DEFINE_ERROR(FamilyLeavesModuli)
G2_DEFINE_ERROR(InexactValue)

#undef G2_DEFINE_ERROR

// Carries det B of the rejected 3-form so front ends can print it.
class NotPositive : public Error {
 public:
  NotPositive(const std::string& what, double det_b)
      : Error(what), det_b_(det_b) {}
  double det_b() const { return det_b_; }

 private:
  double det_b_;
};

}  // namespace g2
