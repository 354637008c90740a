#ifndef FASTRACK_BOX_H_
#define FASTRACK_BOX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace fastrack {

// Axis-aligned interval box. Used for control, disturbance and obstacle sets.
class Box {
 public:
  Box() = default;
  // Throws kInvalidArgument if sizes differ or lo > hi in any dimension.
  Box(std::vector<double> lo, std::vector<double> hi);

  static Box Symmetric(std::span<const double> half_widths);
  static Box Symmetric(std::size_t dim, double half_width);

  std::size_t dim() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }
  double mid(std::size_t i) const { return 0.5 * (lo_[i] + hi_[i]); }
  double half_width(std::size_t i) const { return 0.5 * (hi_[i] - lo_[i]); }
  std::vector<double> midpoint() const;

  bool Contains(std::span<const double> x, double tol = 0.0) const;
  // Closed-box overlap test.
  bool Intersects(const Box& other) const;
  bool ContainsBox(const Box& other, double tol = 0.0) const;

  // Grown (positive) or shrunk (negative) by a per-dimension margin. The
  // result may be empty (lo > hi); check with Empty().
  Box Expanded(std::span<const double> margin) const;
  Box Contracted(std::span<const double> margin) const;
  bool Empty() const;
  // Smallest box containing both.
  Box Hull(const Box& other) const;
  std::vector<double> Clamp(std::span<const double> x) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  struct Unchecked {};
  Box(std::vector<double> lo, std::vector<double> hi, Unchecked);

  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace fastrack

#endif  // FASTRACK_BOX_H_
