#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>

#include "avr/kinematics/forward_kinematics.hpp"

namespace avr::kin {

struct IkParams {
  double damping = 0.05;  // lambda
  int max_iterations = 100;
  double position_tolerance = 0.005;     // m
  double orientation_tolerance = 0.02;   // rad
  double step_scale = 0.5;               // (0, 1]

  void validate() const {
    if (!(damping >= 0.0)) throw ValidationError("IK damping must be >= 0");
    if (max_iterations <= 0) throw ValidationError("IK max_iterations must be > 0");
    if (!(position_tolerance > 0.0) || !(orientation_tolerance > 0.0)) {
      throw ValidationError("IK tolerances must be > 0");
    }
    if (!(step_scale > 0.0 && step_scale <= 1.0)) {
      throw ValidationError("IK step_scale must lie in (0, 1]");
    }
  }
};

struct IkResult {
  JointVector q;
  double position_residual = 0.0;     // m
  double orientation_residual = 0.0;  // rad
  bool converged = false;
  int iterations = 0;
};

/// Damped least-squares IK:
///   dq = J^T (J J^T + lambda^2 I)^-1 e,   q <- clamp(q + step_scale * dq)
/// with e = (p_target - p, rotvec(R_target R^T)). Never throws for an
/// unreachable target; the best iterate (by tolerance-normalized error) is
/// returned with converged = false. Returned q is always within limits.
inline IkResult ik_dls(const JointChain& chain, const JointVector& q0, const Pose6& target,
                       const IkParams& params = {}) {
  params.validate();
  chain.check_configuration(q0);
  if (!target.is_normalized(1e-6)) throw ValidationError("IK target quaternion not normalized");

  const Quat target_q = target.orientation.normalized();
  const double lambda2 = params.damping * params.damping;

  JointVector q = q0;
  IkResult best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= params.max_iterations; ++it) {
    const FkResult fk = detail::forward_unchecked(chain, q);
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.position - fk.ee.position;
    e.tail<3>() = orientation_error(target_q, fk.ee.orientation);
    const double ep = e.head<3>().norm();
    const double eo = e.tail<3>().norm();
    const double score =
        std::max(ep / params.position_tolerance, eo / params.orientation_tolerance);
    if (score < best_score) {
      best_score = score;
      best.q = q;
      best.position_residual = ep;
      best.orientation_residual = eo;
      best.iterations = it;
    }
    if (ep <= params.position_tolerance && eo <= params.orientation_tolerance) {
      best.converged = true;
      return best;
    }
    if (it == params.max_iterations) break;

    // Joints resting on a limit that the step would push further out are
    // dropped from J and the step is re-solved with the remaining joints.
    Jacobian j = detail::jacobian_from_fk(chain, fk);
    JointVector dq;
    for (std::size_t pass = 0; pass <= chain.size(); ++pass) {
      Eigen::Matrix<double, 6, 6> jjt = j * j.transpose();
      jjt.diagonal().array() += lambda2;
      const Eigen::Matrix<double, 6, 1> y = jjt.ldlt().solve(e);
      dq = j.transpose() * y;
      bool masked = false;
      for (Eigen::Index k = 0; k < dq.size(); ++k) {
        const Link& l = chain.link(static_cast<std::size_t>(k));
        const bool pushes_out = (q[k] >= l.upper && dq[k] > 0.0) || (q[k] <= l.lower && dq[k] < 0.0);
        if (pushes_out && !j.col(k).isZero(0.0)) {
          j.col(k).setZero();
          masked = true;
        }
      }
      if (!masked) break;
    }
    q = chain.clamp(q + params.step_scale * dq);
  }
  return best;
}

}  // namespace avr::kin
