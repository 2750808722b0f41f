#pragma once

#include "thinfilm/domain.hpp"

namespace thinfilm {

class FieldImpl {
 public:
  virtual ~FieldImpl() = default;
  virtual int dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual bool has_gradient() const { return false; }
  virtual void gradient(std::span<const double>, std::span<double>) const {
    throw Error(Errc::gradient_unavailable, "field has no gradient");
  }
  virtual bool horizontal_only() const { return false; }
  virtual SmoothnessBounds bounds(const Box&) const { return {}; }
  virtual std::string describe() const = 0;
};

}  // namespace thinfilm
