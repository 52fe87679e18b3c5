#include "sensopt/parameters.hpp"

#include <cmath>

namespace sensopt {

std::string to_string(ParamComponent c) {
  switch (c) {
    case ParamComponent::Alpha: return "alpha";
    case ParamComponent::Beta: return "beta";
    case ParamComponent::ThermalLoad: return "thermal";
  }
  return "?";
}

ParameterVector::ParameterVector(Eigen::VectorXd alpha, double alpha_min)
    : ParameterVector(std::move(alpha), Eigen::VectorXd(), Eigen::VectorXd(),
                      alpha_min) {}

ParameterVector::ParameterVector(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                 Eigen::VectorXd thermal, double alpha_min)
    : alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      thermal_(std::move(thermal)),
      alpha_min_(alpha_min) {
  validate();
  std::vector<ParamComponent> inv;
  if (alpha_.size() > 0) inv.push_back(ParamComponent::Alpha);
  if (beta_.size() > 0) inv.push_back(ParamComponent::Beta);
  if (thermal_.size() > 0) inv.push_back(ParamComponent::ThermalLoad);
  rebuild_layout(inv);
}

ParameterVector& ParameterVector::set_inverted(
    const std::vector<ParamComponent>& comps) {
  rebuild_layout(comps);
  return *this;
}

void ParameterVector::validate() const {
  if (alpha_.size() == 0) throw InvalidParameter("alpha must have one entry per element");
  if (!(alpha_min_ > 0.0)) throw InvalidParameter("alpha_min must be positive");
  for (int i = 0; i < alpha_.size(); ++i) {
    if (!std::isfinite(alpha_[i]) || alpha_[i] < alpha_min_ || alpha_[i] > 1.0) {
      throw InvalidParameter("alpha[" + std::to_string(i) + "] outside [alpha_min, 1]");
    }
  }
  if (beta_.size() > 1) {
    throw UnknownParameterComponent("only a single Young's modulus is supported");
  }
  for (int i = 0; i < beta_.size(); ++i) {
    if (!std::isfinite(beta_[i]) || beta_[i] <= 0.0) {
      throw InvalidParameter("beta must be positive and finite");
    }
  }
  for (int i = 0; i < thermal_.size(); ++i) {
    if (!std::isfinite(thermal_[i])) throw InvalidParameter("thermal coefficients must be finite");
  }
}

void ParameterVector::rebuild_layout(const std::vector<ParamComponent>& inverted) {
  inverted_ = inverted;
  layout_.clear();
  int offset = 0;
  for (ParamComponent c : inverted_) {
    int n = 0;
    switch (c) {
      case ParamComponent::Alpha: n = static_cast<int>(alpha_.size()); break;
      case ParamComponent::Beta: n = static_cast<int>(beta_.size()); break;
      case ParamComponent::ThermalLoad: n = static_cast<int>(thermal_.size()); break;
    }
    if (n == 0) {
      throw InvalidParameter("cannot invert component '" + to_string(c) +
                             "' with no values");
    }
    layout_.push_back({c, offset, n});
    offset += n;
  }
}

int ParameterVector::size() const {
  int n = 0;
  for (const auto& r : layout_) n += r.size;
  return n;
}

Eigen::VectorXd ParameterVector::flat() const {
  Eigen::VectorXd q(size());
  for (const auto& r : layout_) {
    switch (r.component) {
      case ParamComponent::Alpha: q.segment(r.offset, r.size) = alpha_; break;
      case ParamComponent::Beta: q.segment(r.offset, r.size) = beta_; break;
      case ParamComponent::ThermalLoad: q.segment(r.offset, r.size) = thermal_; break;
    }
  }
  return q;
}

ParameterVector ParameterVector::with_flat(const Eigen::VectorXd& q) const {
  if (q.size() != size()) throw InvalidParameter("flat vector has wrong length");
  ParameterVector out = *this;
  for (const auto& r : layout_) {
    switch (r.component) {
      case ParamComponent::Alpha: out.alpha_ = q.segment(r.offset, r.size); break;
      case ParamComponent::Beta: out.beta_ = q.segment(r.offset, r.size); break;
      case ParamComponent::ThermalLoad: out.thermal_ = q.segment(r.offset, r.size); break;
    }
  }
  out.validate();
  return out;
}

}  // namespace sensopt
