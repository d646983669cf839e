#pragma once

// Lifted PDDL models, the sidecar invariant/cost files, and their parsers.
//
// Supported subset: :requirements, :types (including `either`), :constants,
// :predicates, :action and :durative-action with a constant :duration,
// conjunctive positive conditions and conjunctive add/delete effects. Timing
// annotations (at start / at end / over all) are accepted and collapsed, since
// the temporal model only distinguishes preconditions from effects.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dae/rational.hpp"

namespace dae {

/// A name with its admissible types; more than one type means `(either ...)`.
struct TypedName {
    std::string name;
    std::vector<std::string> types;

    bool operator==(const TypedName&) const = default;
};

struct TypeDecl {
    std::string name;
    std::string parent;

    bool operator==(const TypeDecl&) const = default;
};

/// Predicate applied to variables (`?x`) or constants.
struct AtomTemplate {
    std::string predicate;
    std::vector<std::string> args;

    bool operator==(const AtomTemplate&) const = default;
};

struct PredicateDecl {
    std::string name;
    std::vector<TypedName> params;

    std::size_t arity() const { return params.size(); }
    bool operator==(const PredicateDecl&) const = default;
};

struct OperatorDecl {
    std::string name;
    std::vector<TypedName> params;
    std::vector<AtomTemplate> pre;
    std::vector<AtomTemplate> add;
    std::vector<AtomTemplate> del;
    Rational duration{1};
    bool durative = true;

    bool operator==(const OperatorDecl&) const = default;
};

struct DomainModel {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypeDecl> types;
    std::vector<TypedName> constants;
    std::vector<PredicateDecl> predicates;
    std::vector<OperatorDecl> operators;

    const PredicateDecl* find_predicate(std::string_view pred) const;
    bool has_type(std::string_view type) const;
    /// True when `type` equals `ancestor` or inherits from it.
    bool is_subtype(std::string_view type, std::string_view ancestor) const;
    /// True when some type of `object_types` conforms to some type of `expected`.
    bool conforms(const std::vector<std::string>& object_types,
                  const std::vector<std::string>& expected) const;

    bool operator==(const DomainModel&) const = default;
};

struct GroundAtom {
    std::string predicate;
    std::vector<std::string> args;

    auto operator<=>(const GroundAtom&) const = default;
    bool operator==(const GroundAtom&) const = default;
};

/// "(at plane1 City0)"
std::string to_string(const GroundAtom& atom);

struct ProblemModel {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;
    std::vector<GroundAtom> init;
    std::vector<GroundAtom> goal;

    bool operator==(const ProblemModel&) const = default;
};

DomainModel parse_domain(std::string_view text);
ProblemModel parse_problem(std::string_view text, const DomainModel& domain);

/// Canonical PDDL rendering; parsing it back yields an equal model.
std::string to_pddl(const DomainModel& domain);
std::string to_pddl(const ProblemModel& problem);

/// Which predicates describe stations and which argument each is exclusive on.
struct InvariantSpec {
    std::vector<std::string> station_predicates;
    /// predicate -> 1-based argument position that may carry one value per state
    std::map<std::string, std::size_t> exclusivity;

    bool operator==(const InvariantSpec&) const = default;
};

/// Line format: `station-predicate <name>`, `exclusive <name> <index>`, `#` comments.
InvariantSpec parse_invariants(std::string_view text, const DomainModel& domain);

enum class CostMode { additive, max };

/// How a flight turns location values into a cost event.
enum class CostAccrual {
    /// (v(origin) + v(destination)) * (1 + passengers); flights without passengers cost 0
    loaded_flights,
    /// (v(origin) + v(destination)) * (1 + passengers) for every flight
    all_flights,
};

struct CostModel {
    std::map<std::string, Rational> location_values;
    CostMode mode = CostMode::additive;
    CostAccrual accrual = CostAccrual::loaded_flights;
    /// binary predicate placing a vehicle at a location
    std::string location_predicate = "at";
    /// binary predicate (passenger, vehicle)
    std::string carrier_predicate = "in";

    Rational value_of(std::string_view object) const;
    bool operator==(const CostModel&) const = default;
};

/// Line format: `mode additive|max`, `value <object> <rational>`,
/// `accrual loaded|all`, `location-predicate <p>`, `carrier-predicate <p>`.
CostModel parse_cost(std::string_view text);

std::string to_string(CostMode mode);

}  // namespace dae
