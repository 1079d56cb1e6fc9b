#include "asmplan/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace asmplan {

namespace {

double coordinate(const Pose& pose, Axis axis) {
  switch (axis) {
    case Axis::kX: return pose.position.x;
    case Axis::kY: return pose.position.y;
    case Axis::kZ: return pose.position.z;
  }
  return 0.0;
}

double extent(const Vec3& e, Axis axis) {
  switch (axis) {
    case Axis::kX: return e.x;
    case Axis::kY: return e.y;
    case Axis::kZ: return e.z;
  }
  return 0.0;
}

class Builder {
 public:
  explicit Builder(ConstraintSystem& sys) : sys_(sys) {}

  // lhs_terms <= bound
  void leq(std::vector<Term> terms, double bound, ConstraintOrigin origin) {
    sys_.constraints.push_back(
        {std::move(terms), bound, ConstraintKind::kInequality, origin});
  }
  void eq(std::vector<Term> terms, double bound) {
    sys_.constraints.push_back({std::move(terms), bound,
                                ConstraintKind::kEquality,
                                ConstraintOrigin::kHeight});
  }

  // center of `top` within the extent of `base` along `axis`:
  //   base - e/2 <= top <= base + e/2
  void center_over(int top, int base, Axis axis) {
    const double half = 0.5 * extent(sys_.extents[base], axis);
    leq({{top, axis, 1.0}, {base, axis, -1.0}}, half, ConstraintOrigin::kSupport);
    leq({{base, axis, 1.0}, {top, axis, -1.0}}, half, ConstraintOrigin::kSupport);
  }

  // Bridge along `axis` from support `low` to support `high`.
  void bridge(int actor, int low, int high, Axis axis) {
    const double wa = extent(sys_.extents[actor], axis);
    for (int s : {low, high}) {
      const double ws = extent(sys_.extents[s], axis);
      const double need = kBridgeOverlap * ws;
      // actor's upper edge reaches at least `need` past the support's lower edge
      leq({{s, axis, 1.0}, {actor, axis, -1.0}}, 0.5 * wa + 0.5 * ws - need,
          ConstraintOrigin::kBridge);
      // actor's lower edge stays at least `need` before the support's upper edge
      leq({{actor, axis, 1.0}, {s, axis, -1.0}}, 0.5 * wa + 0.5 * ws - need,
          ConstraintOrigin::kBridge);
    }
    leq({{low, axis, 1.0}, {actor, axis, -1.0}}, 0.0, ConstraintOrigin::kBridge);
    leq({{actor, axis, 1.0}, {high, axis, -1.0}}, 0.0, ConstraintOrigin::kBridge);
    const Axis across = axis == Axis::kX ? Axis::kY : Axis::kX;
    center_over(actor, low, across);
    center_over(actor, high, across);
  }

  void on_table(int actor, const Rect& table) {
    const Vec3& e = sys_.extents[actor];
    leq({{actor, Axis::kX, 1.0}}, table.max_x - 0.5 * e.x, ConstraintOrigin::kTable);
    leq({{actor, Axis::kX, -1.0}}, -(table.min_x + 0.5 * e.x), ConstraintOrigin::kTable);
    leq({{actor, Axis::kY, 1.0}}, table.max_y - 0.5 * e.y, ConstraintOrigin::kTable);
    leq({{actor, Axis::kY, -1.0}}, -(table.min_y + 0.5 * e.y), ConstraintOrigin::kTable);
  }

 private:
  ConstraintSystem& sys_;
};

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(9) << v;
  return out.str();
}

}  // namespace

char axis_name(Axis axis) {
  switch (axis) {
    case Axis::kX: return 'x';
    case Axis::kY: return 'y';
    case Axis::kZ: return 'z';
  }
  return '?';
}

double LinearConstraint::violation(const std::vector<Pose>& poses) const {
  double lhs = 0.0;
  for (const Term& t : terms) lhs += t.coeff * coordinate(poses[t.object], t.axis);
  return kind == ConstraintKind::kEquality ? std::abs(lhs - bound) : lhs - bound;
}

std::string LinearConstraint::to_string(const Catalog& catalog) const {
  std::ostringstream out;
  bool first = true;
  for (const Term& t : terms) {
    const double c = t.coeff;
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    if (std::abs(std::abs(c) - 1.0) > 0.0) out << format_number(std::abs(c)) << "*";
    out << axis_name(t.axis) << "_" << catalog[t.object].id;
    first = false;
  }
  out << (kind == ConstraintKind::kEquality ? " = " : " <= ")
      << format_number(bound);
  return out.str();
}

double ConstraintSystem::residual(const std::vector<Pose>& poses) const {
  double worst = 0.0;
  for (const LinearConstraint& c : constraints) {
    worst = std::max(worst, c.violation(poses));
  }
  return worst;
}

std::string ConstraintSystem::dump(const Catalog& catalog) const {
  std::ostringstream out;
  if (!feasible) out << "# infeasible: " << diagnostic << "\n";
  for (const LinearConstraint& c : constraints) out << c.to_string(catalog) << "\n";
  return out.str();
}

ConstraintSystem stability_constraints(const OperatorSequence& seq,
                                       const Catalog& catalog,
                                       const Rect& table_extent) {
  const int n = static_cast<int>(catalog.size());
  ConstraintSystem sys;
  sys.rotations.assign(n, Rotation::kNone);
  sys.z.assign(n, 0.0);
  sys.supports.assign(n, {});
  sys.extents.resize(n);
  for (int i = 0; i < n; ++i) sys.extents[i] = catalog[i].dims;

  std::vector<bool> covered(n, false);
  auto check_index = [n](int i, const Operator& op) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("operator index out of range in " + to_string(op));
    }
  };
  auto require_support = [&](int s, const Operator& op) {
    check_index(s, op);
    if (sys.supports[s].kind == SupportKind::kNone) {
      throw std::invalid_argument("support not yet placed in " + to_string(op));
    }
    if (covered[s]) {
      throw std::invalid_argument("support not clear in " + to_string(op));
    }
  };

  // First pass: rotations and support structure, so extents are final before
  // any constraint is emitted.
  for (const Operator& op : seq) {
    check_index(op.actor, op);
    SupportRecord& rec = sys.supports[op.actor];
    if (rec.kind != SupportKind::kNone) {
      throw std::invalid_argument("object moved twice by " + to_string(op));
    }
    switch (op.kind) {
      case OpKind::kRotate:
        if (sys.rotations[op.actor] == Rotation::kQuarter) {
          throw std::invalid_argument("object rotated twice by " + to_string(op));
        }
        sys.rotations[op.actor] = Rotation::kQuarter;
        sys.extents[op.actor] = rotated_extents(catalog[op.actor].dims, Rotation::kQuarter);
        continue;
      case OpKind::kPutOn:
        if (op.first == kTable) {
          rec = {SupportKind::kTable, kTable, kTable};
        } else {
          require_support(op.first, op);
          rec = {SupportKind::kOn, op.first, kTable};
          covered[op.first] = true;
        }
        break;
      case OpKind::kPutOnAlongX:
      case OpKind::kPutOnAlongY:
        require_support(op.first, op);
        require_support(op.second, op);
        if (op.first == op.second) {
          throw std::invalid_argument("bridge needs two supports: " + to_string(op));
        }
        rec = {op.kind == OpKind::kPutOnAlongX ? SupportKind::kAlongX
                                               : SupportKind::kAlongY,
               op.first, op.second};
        covered[op.first] = true;
        covered[op.second] = true;
        break;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (sys.supports[i].kind == SupportKind::kNone) {
      throw std::invalid_argument("sequence is not terminal: object " +
                                  std::to_string(catalog[i].id) + " never placed");
    }
  }

  Builder build(sys);
  for (const Operator& op : seq) {
    if (!op.is_placement()) continue;
    const int j = op.actor;
    const double hj = sys.extents[j].z;
    if (op.kind == OpKind::kPutOn && op.first == kTable) {
      sys.z[j] = 0.5 * hj;
      build.eq({{j, Axis::kZ, 1.0}}, 0.5 * hj);
      build.on_table(j, table_extent);
      continue;
    }
    const int b = op.first;
    const double hb = sys.extents[b].z;
    sys.z[j] = sys.z[b] + 0.5 * (hb + hj);
    build.eq({{j, Axis::kZ, 1.0}, {b, Axis::kZ, -1.0}}, 0.5 * (hb + hj));
    if (op.kind == OpKind::kPutOn) {
      build.center_over(j, b, Axis::kX);
      build.center_over(j, b, Axis::kY);
      continue;
    }
    const int c = op.second;
    const double top_b = sys.z[b] + 0.5 * hb;
    const double top_c = sys.z[c] + 0.5 * sys.extents[c].z;
    if (std::abs(top_b - top_c) > StripsDomain::kHeightTolerance) {
      sys.feasible = false;
      sys.diagnostic = "supports of " + to_string(op) + " differ in height";
    }
    build.bridge(j, b, c, op.kind == OpKind::kPutOnAlongX ? Axis::kX : Axis::kY);
  }
  return sys;
}

ConstraintSystem penetration_constraints(const std::vector<Pose>& current_poses,
                                         const Catalog& catalog,
                                         const ConstraintSystem& existing,
                                         double tol) {
  ConstraintSystem out = existing;
  Builder build(out);
  const int n = static_cast<int>(catalog.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const Pose& pa = current_poses[a];
      const Pose& pb = current_poses[b];
      if (!boxes_interpenetrate(catalog[a], pa, catalog[b], pb, tol)) continue;
      const Rect fa = footprint(catalog[a], pa);
      const Rect fb = footprint(catalog[b], pb);
      const double overlap_x = std::min(fa.max_x, fb.max_x) - std::max(fa.min_x, fb.min_x);
      const double overlap_y = std::min(fa.max_y, fb.max_y) - std::max(fa.min_y, fb.min_y);
      const Axis axis = overlap_y < overlap_x ? Axis::kY : Axis::kX;
      const bool a_low = coordinate(pa, axis) <= coordinate(pb, axis);
      const Separation sep{a_low ? a : b, a_low ? b : a, axis};
      if (std::find(out.separations.begin(), out.separations.end(), sep) !=
          out.separations.end()) {
        continue;
      }
      out.separations.push_back(sep);
      // low + e_low/2 <= high - e_high/2
      const double gap = 0.5 * (extent(out.extents[sep.low], axis) +
                                extent(out.extents[sep.high], axis));
      build.leq({{sep.low, axis, 1.0}, {sep.high, axis, -1.0}}, -gap,
                ConstraintOrigin::kSeparation);
    }
  }
  return out;
}

VisibleTargets VisibleTargets::from(const Observation& obs, const Catalog& catalog) {
  VisibleTargets t;
  t.by_index.resize(catalog.size());
  for (const auto& [id, pose] : obs.detections) {
    if (catalog.contains(id)) t.by_index[catalog.index_of(id)] = pose;
  }
  return t;
}

std::size_t VisibleTargets::count() const {
  return static_cast<std::size_t>(
      std::count_if(by_index.begin(), by_index.end(),
                    [](const auto& p) { return p.has_value(); }));
}

QpProblem build_pose_qp(const ConstraintSystem& system,
                        const VisibleTargets& targets, const Rect& table_extent,
                        const PoseSolveOptions& options) {
  const int n = static_cast<int>(system.supports.size());
  QpProblem qp = QpProblem::with_variables(2 * n);
  auto var = [](int object, Axis axis) {
    return 2 * object + (axis == Axis::kY ? 1 : 0);
  };

  // weight * (sum_k coeffs_k * v_k - target)^2
  auto add_square = [&](const std::vector<std::pair<int, double>>& coeffs,
                        double target, double weight) {
    for (const auto& [vi, ci] : coeffs) {
      for (const auto& [vj, cj] : coeffs) qp.hessian(vi, vj) += 2.0 * weight * ci * cj;
      qp.linear(vi) -= 2.0 * weight * target * ci;
    }
  };

  for (int i = 0; i < n; ++i) {
    if (!targets.visible(i)) continue;
    const Vec3& p = targets.by_index[i]->position;
    add_square({{var(i, Axis::kX), 1.0}}, p.x, 1.0);
    add_square({{var(i, Axis::kY), 1.0}}, p.y, 1.0);
  }

  const double w = options.hidden_weight;
  for (int j = 0; j < n; ++j) {
    const SupportRecord& rec = system.supports[j];
    for (Axis axis : {Axis::kX, Axis::kY}) {
      switch (rec.kind) {
        case SupportKind::kNone: break;
        case SupportKind::kTable:
          if (!targets.visible(j)) {
            const double c = axis == Axis::kX ? table_extent.center_x()
                                              : table_extent.center_y();
            add_square({{var(j, axis), 1.0}}, c, options.table_anchor_weight);
          }
          break;
        case SupportKind::kOn:
          if (!targets.visible(j) || !targets.visible(rec.first)) {
            add_square({{var(j, axis), 1.0}, {var(rec.first, axis), -1.0}}, 0.0, w);
          }
          break;
        case SupportKind::kAlongX:
        case SupportKind::kAlongY:
          if (!targets.visible(j) || !targets.visible(rec.first) ||
              !targets.visible(rec.second)) {
            add_square({{var(j, axis), 1.0},
                        {var(rec.first, axis), -0.5},
                        {var(rec.second, axis), -0.5}},
                       0.0, w);
          }
          break;
      }
    }
  }

  for (const LinearConstraint& c : system.constraints) {
    if (c.kind == ConstraintKind::kEquality) continue;  // z chains, eliminated
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * n);
    for (const Term& t : c.terms) {
      if (t.axis == Axis::kZ) {
        throw std::logic_error("inequality on z coordinate");
      }
      row(var(t.object, t.axis)) += t.coeff;
    }
    qp.add_inequality(row, c.bound);
  }
  return qp;
}

PoseSolveResult solve_poses(const ConstraintSystem& system,
                            const VisibleTargets& targets,
                            const Rect& table_extent,
                            const PoseSolveOptions& options) {
  PoseSolveResult result;
  result.system = system;
  if (!system.feasible) {
    result.diagnostic = system.diagnostic;
    return result;
  }
  result.problem = build_pose_qp(system, targets, table_extent, options);
  result.solution = solve_qp(result.problem, options.qp);
  if (!result.solution.optimal()) {
    result.diagnostic = "qp " + to_string(result.solution.status) + ": " +
                        result.solution.diagnostic;
    return result;
  }
  const int n = static_cast<int>(system.supports.size());
  result.poses.resize(n);
  for (int i = 0; i < n; ++i) {
    result.poses[i].position = {result.solution.values(2 * i),
                                result.solution.values(2 * i + 1), system.z[i]};
    result.poses[i].rot = system.rotations[i];
  }
  result.feasible = true;
  return result;
}

PoseSolveResult solve_with_penetration_removal(const OperatorSequence& seq,
                                               const Catalog& catalog,
                                               const VisibleTargets& targets,
                                               const Rect& table_extent,
                                               const PoseSolveOptions& options) {
  ConstraintSystem system = stability_constraints(seq, catalog, table_extent);
  int augmentations = 0;
  while (true) {
    PoseSolveResult result = solve_poses(system, targets, table_extent, options);
    result.augmentations = augmentations;
    if (!result.feasible || !options.penetration_removal) return result;
    ConstraintSystem augmented = penetration_constraints(
        result.poses, catalog, system, options.penetration_tolerance);
    if (augmented.size() == system.size()) return result;
    if (augmentations == options.max_augmentations) {
      result.feasible = false;
      result.poses.clear();
      result.diagnostic = "penetration removal did not converge";
      return result;
    }
    system = std::move(augmented);
    ++augmentations;
  }
}

}  // namespace asmplan
