#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "avr/core/errors.hpp"
#include "avr/core/pose.hpp"

namespace avr::kin {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// One revolute joint. The joint frame is reached from the previous link
/// frame by `parent_offset`; the joint then rotates about `axis` (joint frame).
struct Link {
  std::string name;
  Pose6 parent_offset;
  Vec3 axis = Vec3::UnitZ();
  double lower = -kPi;
  double upper = kPi;
};

/// Serial chain of revolute joints, with a world-frame base and a tool
/// offset after the last joint.
class JointChain {
 public:
  JointChain() = default;
  JointChain(std::vector<Link> links, Pose6 base = {}, Pose6 ee_offset = {})
      : links_(std::move(links)), base_(std::move(base)), ee_offset_(std::move(ee_offset)) {
    validate();
  }

  std::size_t size() const noexcept { return links_.size(); }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Link& link(std::size_t i) const { return links_.at(i); }
  const Pose6& base() const noexcept { return base_; }
  const Pose6& ee_offset() const noexcept { return ee_offset_; }

  JointChain with_base(const Pose6& base) const {
    JointChain c = *this;
    c.base_ = base;
    return c;
  }
  JointChain with_ee_offset(const Pose6& ee) const {
    JointChain c = *this;
    c.ee_offset_ = ee;
    return c;
  }

  JointVector lower_limits() const {
    JointVector v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = links_[i].lower;
    return v;
  }
  JointVector upper_limits() const {
    JointVector v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = links_[i].upper;
    return v;
  }

  /// Throws DimensionMismatch / JointLimitViolation.
  void check_configuration(const JointVector& q) const {
    if (static_cast<std::size_t>(q.size()) != size()) {
      throw DimensionMismatch(size(), static_cast<std::size_t>(q.size()));
    }
    for (std::size_t i = 0; i < size(); ++i) {
      const double v = q[static_cast<Eigen::Index>(i)];
      if (!std::isfinite(v) || v < links_[i].lower || v > links_[i].upper) {
        throw JointLimitViolation(i, v, links_[i].lower, links_[i].upper);
      }
    }
  }

  JointVector clamp(JointVector q) const {
    for (std::size_t i = 0; i < size(); ++i) {
      auto& v = q[static_cast<Eigen::Index>(i)];
      v = std::clamp(v, links_[i].lower, links_[i].upper);
    }
    return q;
  }

  bool within_limits(const JointVector& q) const {
    if (static_cast<std::size_t>(q.size()) != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      const double v = q[static_cast<Eigen::Index>(i)];
      if (!(v >= links_[i].lower && v <= links_[i].upper)) return false;
    }
    return true;
  }

 private:
  void validate() const {
    if (links_.empty()) throw ConfigError("joint chain must have at least one joint");
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const Link& l = links_[i];
      if (std::abs(l.axis.norm() - 1.0) > kUnitTolerance) {
        throw ConfigError("joint " + std::to_string(i) + " axis is not unit length");
      }
      if (!(l.lower <= l.upper)) {
        throw ConfigError("joint " + std::to_string(i) + " has lower limit above upper limit");
      }
      if (!l.parent_offset.is_normalized()) {
        throw ConfigError("joint " + std::to_string(i) + " offset quaternion not normalized");
      }
    }
    if (!base_.is_normalized() || !ee_offset_.is_normalized()) {
      throw ConfigError("chain base/ee quaternion not normalized");
    }
  }

  std::vector<Link> links_;
  Pose6 base_;
  Pose6 ee_offset_;
};

}  // namespace avr::kin
