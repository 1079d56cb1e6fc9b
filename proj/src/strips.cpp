#include "asmplan/strips.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace asmplan {

Operator put_on(int actor, int support) {
  return {OpKind::kPutOn, actor, support, kTable};
}
Operator put_on_along_x(int actor, int low, int high) {
  return {OpKind::kPutOnAlongX, actor, low, high};
}
Operator put_on_along_y(int actor, int low, int high) {
  return {OpKind::kPutOnAlongY, actor, low, high};
}
Operator rotate(int actor) { return {OpKind::kRotate, actor, kTable, kTable}; }

namespace {

std::string object_name(int index) {
  return index == kTable ? std::string("TABLE") : std::to_string(index);
}

}  // namespace

std::string to_string(const Operator& op) {
  std::ostringstream out;
  switch (op.kind) {
    case OpKind::kPutOn:
      out << "PutOn(" << op.actor << ", " << object_name(op.first) << ")";
      break;
    case OpKind::kPutOnAlongX:
      out << "PutOnAlongX(" << op.actor << ", " << op.first << ", "
          << op.second << ")";
      break;
    case OpKind::kPutOnAlongY:
      out << "PutOnAlongY(" << op.actor << ", " << op.first << ", "
          << op.second << ")";
      break;
    case OpKind::kRotate:
      out << "Rotate(" << op.actor << ")";
      break;
  }
  return out.str();
}

std::string to_string(const Predicate& p) {
  std::ostringstream out;
  switch (p.kind) {
    case PredicateKind::kOnTable: out << "OnTable(" << p.a << ")"; break;
    case PredicateKind::kClear: out << "Clear(" << p.a << ")"; break;
    case PredicateKind::kOn: out << "On(" << p.a << ", " << p.b << ")"; break;
    case PredicateKind::kOnAlongX:
      out << "OnAlongX(" << p.a << ", " << p.b << ", " << p.c << ")";
      break;
    case PredicateKind::kOnAlongY:
      out << "OnAlongY(" << p.a << ", " << p.b << ", " << p.c << ")";
      break;
    case PredicateKind::kRot: out << "Rot(" << p.a << ")"; break;
  }
  return out.str();
}

std::vector<int> StripsState::moved_set() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(objects_.size()); ++i) {
    if (objects_[i].placed()) out.push_back(i);
  }
  return out;
}

std::vector<int> StripsState::unmoved_set() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(objects_.size()); ++i) {
    if (!objects_[i].placed()) out.push_back(i);
  }
  return out;
}

std::vector<Predicate> StripsState::predicates() const {
  std::vector<Predicate> out;
  for (int i = 0; i < static_cast<int>(objects_.size()); ++i) {
    const ObjectStatus& o = objects_[i];
    if (o.rotated) out.push_back({PredicateKind::kRot, i});
    switch (o.support) {
      case SupportKind::kNone: break;
      case SupportKind::kTable: out.push_back({PredicateKind::kOnTable, i}); break;
      case SupportKind::kOn: out.push_back({PredicateKind::kOn, i, o.first}); break;
      case SupportKind::kAlongX:
        out.push_back({PredicateKind::kOnAlongX, i, o.first, o.second});
        break;
      case SupportKind::kAlongY:
        out.push_back({PredicateKind::kOnAlongY, i, o.first, o.second});
        break;
    }
    if (o.clear()) out.push_back({PredicateKind::kClear, i});
  }
  std::sort(out.begin(), out.end());
  return out;
}

StripsDomain::StripsDomain(std::vector<double> heights)
    : heights_(std::move(heights)) {
  for (double h : heights_) {
    if (!(h > 0.0)) throw std::invalid_argument("object height must be positive");
  }
}

double StripsDomain::support_top(const StripsState& state, int support) const {
  return support == kTable ? 0.0 : state.objects_[support].top;
}

bool StripsDomain::bridge_supports_ok(const StripsState& state, int actor,
                                      int low, int high) const {
  (void)actor;
  if (low == high || low == kTable || high == kTable) return false;
  const ObjectStatus& b = state.objects_[low];
  const ObjectStatus& c = state.objects_[high];
  return b.clear() && c.clear() &&
         std::abs(b.top - c.top) <= kHeightTolerance;
}

bool StripsDomain::is_applicable(const StripsState& state,
                                 const Operator& op) const {
  const int n = static_cast<int>(heights_.size());
  if (op.actor < 0 || op.actor >= n) return false;
  const ObjectStatus& actor = state.objects_[op.actor];
  if (actor.placed()) return false;
  auto valid_index = [n](int i) { return i >= 0 && i < n; };
  switch (op.kind) {
    case OpKind::kRotate:
      return !actor.rotated;
    case OpKind::kPutOn:
      if (op.first == kTable) return true;
      return valid_index(op.first) && state.objects_[op.first].clear();
    case OpKind::kPutOnAlongX:
    case OpKind::kPutOnAlongY:
      return valid_index(op.first) && valid_index(op.second) &&
             bridge_supports_ok(state, op.actor, op.first, op.second);
  }
  return false;
}

std::vector<Operator> StripsDomain::applicable_operators(
    const StripsState& state) const {
  std::vector<Operator> ops;
  const int n = static_cast<int>(heights_.size());
  std::vector<int> clear;
  for (int i = 0; i < n; ++i) {
    if (state.objects_[i].clear()) clear.push_back(i);
  }
  for (int a = 0; a < n; ++a) {
    const ObjectStatus& actor = state.objects_[a];
    if (actor.placed()) continue;
    if (!actor.rotated) ops.push_back(rotate(a));
    ops.push_back(put_on(a, kTable));
    for (int b : clear) ops.push_back(put_on(a, b));
    for (OpKind kind : {OpKind::kPutOnAlongX, OpKind::kPutOnAlongY}) {
      for (int b : clear) {
        for (int c : clear) {
          if (b != c && std::abs(state.objects_[b].top -
                                 state.objects_[c].top) <= kHeightTolerance) {
            ops.push_back({kind, a, b, c});
          }
        }
      }
    }
  }
  return ops;
}

StripsState StripsDomain::apply(const StripsState& state,
                                const Operator& op) const {
  if (!is_applicable(state, op)) {
    throw std::invalid_argument("inapplicable operator " + to_string(op));
  }
  StripsState next = state;
  ObjectStatus& actor = next.objects_[op.actor];
  switch (op.kind) {
    case OpKind::kRotate:
      actor.rotated = true;
      return next;
    case OpKind::kPutOn:
      actor.support = op.first == kTable ? SupportKind::kTable : SupportKind::kOn;
      actor.first = op.first;
      if (op.first != kTable) next.objects_[op.first].covered = true;
      break;
    case OpKind::kPutOnAlongX:
    case OpKind::kPutOnAlongY:
      actor.support = op.kind == OpKind::kPutOnAlongX ? SupportKind::kAlongX
                                                      : SupportKind::kAlongY;
      actor.first = op.first;
      actor.second = op.second;
      next.objects_[op.first].covered = true;
      next.objects_[op.second].covered = true;
      break;
  }
  actor.covered = false;
  actor.top = support_top(state, op.first) + heights_[op.actor];
  --next.unmoved_;
  return next;
}

StripsState StripsDomain::replay(const OperatorSequence& seq) const {
  StripsState state = initial_state();
  for (const Operator& op : seq) state = apply(state, op);
  return state;
}

std::optional<std::string> StripsDomain::check_invariants(
    const StripsState& state) const {
  const int n = static_cast<int>(heights_.size());
  if (static_cast<int>(state.size()) != n) return "state size mismatch";
  std::vector<int> load(n, 0);
  std::size_t unmoved = 0;
  for (int i = 0; i < n; ++i) {
    const ObjectStatus& o = state.objects_[i];
    if (!o.placed()) {
      ++unmoved;
      if (o.covered) return "unmoved object " + std::to_string(i) + " is covered";
      continue;
    }
    auto check_support = [&](int s) -> std::optional<std::string> {
      if (s < 0 || s >= n) return "bad support index";
      if (s == i) return "object supports itself";
      if (!state.objects_[s].placed()) {
        return "object " + std::to_string(i) + " rests on unplaced object";
      }
      ++load[s];
      return std::nullopt;
    };
    double expected_top = 0.0;
    switch (o.support) {
      case SupportKind::kNone: break;
      case SupportKind::kTable: expected_top = heights_[i]; break;
      case SupportKind::kOn:
        if (auto err = check_support(o.first)) return err;
        expected_top = state.objects_[o.first].top + heights_[i];
        break;
      case SupportKind::kAlongX:
      case SupportKind::kAlongY: {
        if (o.first == o.second) return "bridge with identical supports";
        if (auto err = check_support(o.first)) return err;
        if (auto err = check_support(o.second)) return err;
        const double tb = state.objects_[o.first].top;
        const double tc = state.objects_[o.second].top;
        if (std::abs(tb - tc) > kHeightTolerance) return "bridge supports differ in height";
        expected_top = tb + heights_[i];
        break;
      }
    }
    if (std::abs(expected_top - o.top) > kHeightTolerance) {
      return "top height of object " + std::to_string(i) + " inconsistent";
    }
  }
  if (unmoved != state.unmoved_) return "unmoved counter out of sync";
  for (int i = 0; i < n; ++i) {
    const ObjectStatus& o = state.objects_[i];
    if (o.placed() && o.covered != (load[i] > 0)) {
      return "Clear(" + std::to_string(i) + ") inconsistent with load";
    }
  }
  return std::nullopt;
}

}  // namespace asmplan
