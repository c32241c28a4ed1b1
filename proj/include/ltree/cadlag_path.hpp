#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ltree {

enum class TerminalKind { killed, hit_zero, horizon, infinite_proxy, escaped };

std::string to_string(TerminalKind k);

// Breakpoint of a piecewise-affine cadlag path: `left` is f(t-), `value` is
// f(t). Between consecutive knots the path is affine, running from
// knots[i].value to knots[i+1].left.
struct Knot {
  double t = 0.0;
  double left = 0.0;
  double value = 0.0;
};

class CadlagPath {
 public:
  std::vector<Knot> knots;
  TerminalKind terminal = TerminalKind::horizon;
  // Times at which a prolific line reaches the truncation height.
  std::vector<double> tips;

  bool empty() const { return knots.size() < 2; }
  double lifetime() const { return knots.empty() ? 0.0 : knots.back().t; }
  double start_value() const { return knots.front().value; }
  double end_value() const { return knots.back().left; }

  // Index i with knots[i].t <= t < knots[i+1].t (last segment for t = lifetime).
  std::size_t segment(double t) const;
  double value(double t) const;
  double left_limit(double t) const;

  bool has_jumps() const;
  double min_value() const;
  double max_value() const;

  // Appends a point reached continuously from the current end.
  void push(double t, double v);
  // Makes the current end jump to v.
  void jump_to(double v);
  void clear() {
    knots.clear();
    tips.clear();
  }

  // Throws MalformedPath when knot times are not increasing.
  void validate() const;

  // Header "t,value,is_jump"; a jump knot gives two rows (left limit, then
  // the post-jump value flagged 1).
  void write_csv(std::ostream& os) const;
};

// f v g: paths laid end to end without level shift. Empty paths are skipped.
CadlagPath concatenate(const std::vector<CadlagPath>& parts);

// g = f o C with C the right-continuous inverse of A_t = Leb{s <= t: f(s) <= r}.
CadlagPath time_change_below(const CadlagPath& f, double r);

// X_{T_m + t} - X_{T_m -}, T_m the last time the overall minimum is approached.
CadlagPath post_minimum(const CadlagPath& f);

CadlagPath shift_values(CadlagPath f, double dv);

// (f on [0,t) closed at f(t-), f(t + .)).
std::pair<CadlagPath, CadlagPath> split_at(const CadlagPath& f, double t);

// First time >= from at which the path is <= level (continuous descent), or
// -1 when it never happens.
double first_passage_below(const CadlagPath& f, double level, double from = 0.0);

// Leb{t : f(t) <= r}.
double time_at_or_below(const CadlagPath& f, double r);

// Range minimum over knot lows with O(1) queries.
class RangeMin {
 public:
  explicit RangeMin(const CadlagPath& f);
  // inf of f over [s, t], left limits included.
  double inf(double s, double t) const;
  // inf{u > s : f(u) < level}; lifetime when never.
  double first_time_below(double s, double level) const;

 private:
  double table_min(std::size_t lo, std::size_t hi) const;  // knots lo..hi inclusive
  const CadlagPath& f_;
  std::vector<std::vector<double>> table_;
};

}  // namespace ltree
