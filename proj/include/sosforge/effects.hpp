#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "sosforge/errors.hpp"

namespace sosforge {

enum class EffectKind { Det, Partial, FinSet };

inline const char* to_string(EffectKind k) {
  switch (k) {
    case EffectKind::Det: return "det";
    case EffectKind::Partial: return "partial";
    case EffectKind::FinSet: return "finset";
  }
  return "?";
}

/// A value of T A for one of the three supported monads.
///
/// Det holds exactly one element, Partial at most one (none means Diverged),
/// FinSet a duplicate-free sorted set. A must be equality and less-than comparable.
template <class A>
class Effect {
 public:
  Effect() : kind_(EffectKind::FinSet) {}

  static Effect unit(EffectKind k, A a) {
    Effect e(k);
    e.items_.push_back(std::move(a));
    return e;
  }

  static Effect bottom(EffectKind k) {
    if (k == EffectKind::Det) throw EffectError("the deterministic effect has no bottom");
    return Effect(k);
  }

  /// Builds an effect from a list of candidate results, checking the kind's cardinality.
  static Effect from_items(EffectKind k, std::vector<A> items) {
    Effect e(k);
    e.items_ = std::move(items);
    e.normalize();
    if (k == EffectKind::Det && e.items_.size() != 1)
      throw EffectError("deterministic effect needs exactly one result, got " +
                        std::to_string(e.items_.size()));
    if (k == EffectKind::Partial && e.items_.size() > 1)
      throw EffectError("partial effect got " + std::to_string(e.items_.size()) + " results");
    return e;
  }

  EffectKind kind() const { return kind_; }
  const std::vector<A>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool is_bottom() const { return items_.empty(); }
  bool contains(const A& a) const {
    if (kind_ == EffectKind::FinSet) return std::binary_search(items_.begin(), items_.end(), a);
    return std::find(items_.begin(), items_.end(), a) != items_.end();
  }

  friend bool operator==(const Effect& x, const Effect& y) {
    return x.kind_ == y.kind_ && x.items_ == y.items_;
  }

 private:
  explicit Effect(EffectKind k) : kind_(k) {}

  void normalize() {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
  }

  EffectKind kind_;
  std::vector<A> items_;
};

/// Kleisli extension. Every f-result must share the kind of e.
template <class A, class F>
auto bind(const Effect<A>& e, F&& f) -> decltype(f(std::declval<const A&>())) {
  using R = decltype(f(std::declval<const A&>()));
  using B = std::decay_t<decltype(std::declval<R>().items().front())>;
  std::vector<B> out;
  for (const A& a : e.items()) {
    R r = f(a);
    if (r.kind() != e.kind())
      throw EffectError(std::string("bind mixes effect kinds ") + to_string(e.kind()) + " and " +
                        to_string(r.kind()));
    out.insert(out.end(), r.items().begin(), r.items().end());
  }
  return R::from_items(e.kind(), std::move(out));
}

template <class A, class F>
auto fmap(const Effect<A>& e, F&& f) {
  using B = std::decay_t<decltype(f(std::declval<const A&>()))>;
  return bind(e, [&](const A& a) { return Effect<B>::unit(e.kind(), f(a)); });
}

/// The order: equality on Det, Diverged below everything on Partial, inclusion on FinSet.
template <class A>
bool leq(const Effect<A>& x, const Effect<A>& y) {
  if (x.kind() != y.kind()) throw EffectError("leq on different effect kinds");
  switch (x.kind()) {
    case EffectKind::Det: return x.items() == y.items();
    case EffectKind::Partial: return x.is_bottom() || x.items() == y.items();
    case EffectKind::FinSet:
      return std::includes(y.items().begin(), y.items().end(), x.items().begin(),
                           x.items().end());
  }
  return false;
}

/// Distributes the effect over a tuple: the cartesian product for FinSet.
template <class A>
Effect<std::vector<A>> dist_chi(EffectKind kind, const std::vector<Effect<A>>& args) {
  for (const auto& a : args)
    if (a.kind() != kind) throw EffectError("dist_chi over mixed effect kinds");
  std::vector<std::vector<A>> acc{{}};
  for (const auto& a : args) {
    std::vector<std::vector<A>> next;
    next.reserve(acc.size() * a.size());
    for (const auto& prefix : acc) {
      for (const A& x : a.items()) {
        next.push_back(prefix);
        next.back().push_back(x);
      }
    }
    acc = std::move(next);
  }
  return Effect<std::vector<A>>::from_items(kind, std::move(acc));
}

}  // namespace sosforge
