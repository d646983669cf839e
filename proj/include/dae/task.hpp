#pragma once

// Grounded planning task: an indexed atom universe, ground actions with
// integer-tick durations, the initial state and the goal.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "dae/model.hpp"

namespace dae {

using AtomId = std::uint32_t;
using ActionId = std::uint32_t;
using Ticks = std::int64_t;

/// Set of true atoms over a task's atom universe.
class WorldState {
public:
    WorldState() = default;
    explicit WorldState(std::size_t universe) : bits_(universe) {}

    std::size_t universe() const { return bits_.size(); }
    bool contains(AtomId a) const { return bits_.test(a); }
    bool contains_all(std::span<const AtomId> atoms) const {
        for (AtomId a : atoms)
            if (!bits_.test(a)) return false;
        return true;
    }
    void insert(AtomId a) { bits_.set(a); }
    void erase(AtomId a) { bits_.reset(a); }
    std::size_t size() const { return bits_.count(); }
    std::vector<AtomId> atoms() const;

    const boost::dynamic_bitset<>& bits() const { return bits_; }

    friend bool operator==(const WorldState&, const WorldState&) = default;
    friend bool operator<(const WorldState& a, const WorldState& b) { return a.bits_ < b.bits_; }

private:
    boost::dynamic_bitset<> bits_;
};

struct GroundAction {
    ActionId id = 0;
    std::string name;
    std::vector<std::string> args;
    /// sorted, duplicate-free
    std::vector<AtomId> pre;
    std::vector<AtomId> add;
    std::vector<AtomId> del;
    Ticks dur = 0;

    /// "(fly plane1 City0 City1)"
    std::string label() const;
};

struct GroundTask {
    std::vector<GroundAtom> atoms;
    std::vector<GroundAction> actions;
    WorldState init;
    std::vector<AtomId> goal;
    /// ticks per time unit of the source durations
    std::int64_t time_scale = 1;

    /// Typed objects, kept so stations can enumerate value domains.
    std::vector<TypedName> objects;
    DomainModel domain;

    std::size_t atom_count() const { return atoms.size(); }
    /// Index of a ground atom, or atom_count() when absent from the universe.
    AtomId find_atom(const GroundAtom& atom) const;
    std::string atom_label(AtomId a) const { return to_string(atoms.at(a)); }
    /// Objects whose type conforms to one of `types`, in declaration order.
    std::vector<std::string> objects_of(const std::vector<std::string>& types) const;
    WorldState make_state(std::span<const AtomId> atoms) const;
    /// Duration of a tick count in source units.
    Rational to_time(Ticks t) const { return Rational(t, time_scale); }
};

struct GroundingOptions {
    /// Upper bound on candidate actions before reachability pruning.
    std::size_t max_actions = 200000;
};

/// Instantiates every operator over type-conforming objects, drops actions
/// whose preconditions are unreachable under the delete relaxation, and orders
/// atoms and actions lexicographically (name, then arguments).
GroundTask ground(const DomainModel& domain, const ProblemModel& problem, const GroundingOptions& options = {});

}  // namespace dae

template <>
struct std::hash<dae::WorldState> {
    std::size_t operator()(const dae::WorldState& s) const noexcept {
        return std::hash<boost::dynamic_bitset<>>{}(s.bits());
    }
};
