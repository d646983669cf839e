#include "dae/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dae/errors.hpp"
#include "sexpr.hpp"

namespace dae {

using detail::Sexpr;

const PredicateDecl* DomainModel::find_predicate(std::string_view pred) const {
    for (const auto& p : predicates)
        if (p.name == pred) return &p;
    return nullptr;
}

bool DomainModel::has_type(std::string_view type) const {
    if (type == "object") return true;
    return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == type; });
}

bool DomainModel::is_subtype(std::string_view type, std::string_view ancestor) const {
    if (ancestor == "object") return true;
    std::string_view current = type;
    // the hierarchy is a forest; bound the walk in case of a cyclic declaration
    for (std::size_t hops = 0; hops <= types.size(); ++hops) {
        if (current == ancestor) return true;
        auto it = std::find_if(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == current; });
        if (it == types.end()) return false;
        current = it->parent;
    }
    return false;
}

bool DomainModel::conforms(const std::vector<std::string>& object_types,
                           const std::vector<std::string>& expected) const {
    for (const auto& have : object_types)
        for (const auto& want : expected)
            if (is_subtype(have, want)) return true;
    return false;
}

std::string to_string(const GroundAtom& atom) {
    std::string out = "(" + atom.predicate;
    for (const auto& a : atom.args) out += " " + a;
    return out + ")";
}

Rational CostModel::value_of(std::string_view object) const {
    auto it = location_values.find(std::string(object));
    return it == location_values.end() ? Rational(0) : it->second;
}

std::string to_string(CostMode mode) { return mode == CostMode::additive ? "additive" : "max"; }

namespace {

[[noreturn]] void syntax(const std::string& what, const Sexpr& at) {
    throw SyntaxError(what, at.line, at.column);
}

[[noreturn]] void unsupported(const std::string& what, const Sexpr& at) {
    throw UnsupportedFeature(what, at.line, at.column);
}

const std::string& atom_text(const Sexpr& e, const char* what) {
    if (!e.is_atom()) syntax(std::string("expected ") + what, e);
    return e.atom;
}

const Sexpr& expect_list(const Sexpr& e, const char* what) {
    if (!e.is_list) syntax(std::string("expected ") + what, e);
    return e;
}

bool is_variable(std::string_view s) { return !s.empty() && s.front() == '?'; }

bool is_number(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
    bool digit = false;
    for (; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i])))
            digit = true;
        else if (s[i] != '.' && s[i] != '/')
            return false;
    }
    return digit;
}

/// `a b - t c - (either u v) d` -> typed names; untyped trailing names are objects.
std::vector<TypedName> parse_typed_list(const std::vector<Sexpr>& items, std::size_t from) {
    std::vector<TypedName> out;
    std::vector<std::string> pending;
    for (std::size_t i = from; i < items.size(); ++i) {
        const Sexpr& e = items[i];
        if (e.is_atom() && e.atom == "-") {
            if (i + 1 >= items.size()) syntax("missing type after '-'", e);
            const Sexpr& t = items[++i];
            std::vector<std::string> types;
            if (t.is_list) {
                if (!(t.items.size() >= 2 && t.items.front().is("either"))) syntax("malformed type", t);
                for (std::size_t k = 1; k < t.items.size(); ++k) types.push_back(atom_text(t.items[k], "type name"));
            } else {
                types.push_back(t.atom);
            }
            if (pending.empty()) syntax("type without names", e);
            for (auto& n : pending) out.push_back({std::move(n), types});
            pending.clear();
        } else {
            pending.push_back(atom_text(e, "name"));
        }
    }
    for (auto& n : pending) out.push_back({std::move(n), {"object"}});
    return out;
}

const std::set<std::string> kSupportedRequirements = {":strips", ":typing", ":durative-actions"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

class DomainParser {
public:
    DomainModel parse(const Sexpr& root) {
        if (!root.is_list || root.items.size() < 2 || !root.items[0].is("define")) syntax("expected (define ...)", root);
        const Sexpr& header = expect_list(root.items[1], "(domain <name>)");
        if (header.items.size() != 2 || !header.items[0].is("domain")) syntax("expected (domain <name>)", header);
        dm_.name = atom_text(header.items[1], "domain name");

        bool typed = false;
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const Sexpr& section = expect_list(root.items[i], "domain section");
            const std::string key = lower(std::string(section.head()));
            if (key == ":requirements") {
                for (std::size_t k = 1; k < section.items.size(); ++k) {
                    const std::string req = lower(atom_text(section.items[k], "requirement"));
                    if (!kSupportedRequirements.count(req)) unsupported("requirement " + req, section.items[k]);
                    typed = typed || req == ":typing";
                    dm_.requirements.push_back(req);
                }
            } else if (key == ":types") {
                for (auto& tn : parse_typed_list(section.items, 1)) {
                    if (tn.types.size() != 1) unsupported("either-typed supertype", section);
                    dm_.types.push_back({tn.name, tn.types.front()});
                }
            } else if (key == ":constants") {
                dm_.constants = parse_typed_list(section.items, 1);
            } else if (key == ":predicates") {
                for (std::size_t k = 1; k < section.items.size(); ++k) parse_predicate(section.items[k]);
            } else if (key == ":functions") {
                unsupported("numeric fluents (:functions)", section);
            } else if (key == ":action") {
                parse_operator(section, false);
            } else if (key == ":durative-action") {
                parse_operator(section, true);
            } else if (key == ":derived") {
                unsupported("derived predicates", section);
            } else {
                syntax("unknown domain section " + std::string(section.head()), section);
            }
        }
        if (!typed) unsupported("untyped PDDL (missing :typing)", root);
        for (const auto& t : dm_.types)
            if (!dm_.has_type(t.parent)) throw UnknownSymbol(t.parent, root.line, root.column);
        for (const auto& c : dm_.constants) check_types(c.types, root);
        return std::move(dm_);
    }

private:
    void check_types(const std::vector<std::string>& types, const Sexpr& at) const {
        for (const auto& t : types)
            if (!dm_.has_type(t)) throw UnknownSymbol(t, at.line, at.column);
    }

    void parse_predicate(const Sexpr& e) {
        expect_list(e, "predicate declaration");
        if (e.items.empty()) syntax("empty predicate declaration", e);
        PredicateDecl p{atom_text(e.items[0], "predicate name"), parse_typed_list(e.items, 1)};
        if (dm_.find_predicate(p.name)) syntax("duplicate predicate " + p.name, e);
        dm_.predicates.push_back(std::move(p));
    }

    void parse_operator(const Sexpr& section, bool durative) {
        if (section.items.size() < 2) syntax("operator without name", section);
        OperatorDecl op;
        op.name = atom_text(section.items[1], "operator name");
        op.durative = durative;
        op.duration = Rational(1);
        for (const auto& existing : dm_.operators)
            if (existing.name == op.name) syntax("duplicate operator " + op.name, section);
        bool have_duration = false;
        for (std::size_t i = 2; i < section.items.size(); i += 2) {
            const std::string key = lower(atom_text(section.items[i], "operator keyword"));
            if (i + 1 >= section.items.size()) syntax("missing value for " + key, section.items[i]);
            const Sexpr& value = section.items[i + 1];
            if (key == ":parameters") {
                op.params = parse_typed_list(expect_list(value, "parameter list").items, 0);
                for (const auto& p : op.params) {
                    if (!is_variable(p.name)) syntax("parameter must start with '?'", value);
                    check_types(p.types, value);
                }
            } else if (key == ":duration" && durative) {
                op.duration = parse_duration(value);
                have_duration = true;
            } else if ((key == ":condition" && durative) || (key == ":precondition" && !durative)) {
                parse_condition(value, op);
            } else if (key == ":effect") {
                parse_effect(value, op, false);
            } else {
                syntax("unexpected operator keyword " + key, section.items[i]);
            }
        }
        if (durative && !have_duration) syntax("durative action without :duration", section);
        // add wins over delete when an atom is both
        std::erase_if(op.del, [&](const AtomTemplate& d) {
            return std::find(op.add.begin(), op.add.end(), d) != op.add.end();
        });
        dm_.operators.push_back(std::move(op));
    }

    Rational parse_duration(const Sexpr& e) {
        if (!e.is_list || e.items.size() != 3 || !e.items[0].is("=") || !e.items[1].is("?duration"))
            unsupported("duration constraint other than (= ?duration <constant>)", e);
        const Sexpr& v = e.items[2];
        if (v.is_list || !is_number(v.atom)) unsupported("non-constant duration", v);
        Rational d;
        try {
            d = parse_rational(v.atom);
        } catch (const std::exception&) {
            syntax("malformed duration " + v.atom, v);
        }
        if (d < 0) syntax("negative duration", v);
        return d;
    }

    static bool is_time_annotation(const Sexpr& e) {
        if (!e.is_list) return false;
        if (e.items.size() == 3 && e.items[0].is("at") && (e.items[1].is("start") || e.items[1].is("end")) &&
            e.items[2].is_list)
            return true;
        return e.items.size() == 3 && e.items[0].is("over") && e.items[1].is("all") && e.items[2].is_list;
    }

    void parse_condition(const Sexpr& e, OperatorDecl& op) {
        expect_list(e, "condition");
        if (e.items.empty()) return;
        if (e.items[0].is("and")) {
            for (std::size_t i = 1; i < e.items.size(); ++i) parse_condition(e.items[i], op);
            return;
        }
        if (is_time_annotation(e)) return parse_condition(e.items[2], op);
        if (e.items[0].is("not")) unsupported("negative precondition", e);
        for (const char* kw : {"or", "imply", "exists", "forall", "preference"})
            if (e.items[0].is(kw)) unsupported(std::string("'") + kw + "' condition", e);
        for (const char* kw : {"=", "<", "<=", ">", ">="})
            if (e.items[0].is(kw)) unsupported("numeric or equality condition", e);
        add_unique(op.pre, parse_atom(e, op));
    }

    void parse_effect(const Sexpr& e, OperatorDecl& op, bool negated) {
        expect_list(e, "effect");
        if (e.items.empty()) return;
        if (e.items[0].is("and") && !negated) {
            for (std::size_t i = 1; i < e.items.size(); ++i) parse_effect(e.items[i], op, false);
            return;
        }
        if (is_time_annotation(e) && !negated) return parse_effect(e.items[2], op, false);
        if (e.items[0].is("not")) {
            if (negated || e.items.size() != 2) syntax("malformed negation", e);
            return parse_effect(e.items[1], op, true);
        }
        if (e.items[0].is("when")) unsupported("conditional effect", e);
        if (e.items[0].is("forall")) unsupported("universal effect", e);
        for (const char* kw : {"increase", "decrease", "assign", "scale-up", "scale-down"})
            if (e.items[0].is(kw)) unsupported("numeric effect", e);
        add_unique(negated ? op.del : op.add, parse_atom(e, op));
    }

    static void add_unique(std::vector<AtomTemplate>& into, AtomTemplate a) {
        if (std::find(into.begin(), into.end(), a) == into.end()) into.push_back(std::move(a));
    }

    AtomTemplate parse_atom(const Sexpr& e, const OperatorDecl& op) const {
        const std::string& name = atom_text(e.items[0], "predicate name");
        const PredicateDecl* decl = dm_.find_predicate(name);
        if (!decl) throw UnknownSymbol(name, e.line, e.column);
        AtomTemplate atom{name, {}};
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const std::string& term = atom_text(e.items[i], "term");
            if (is_variable(term)) {
                bool bound = std::any_of(op.params.begin(), op.params.end(),
                                         [&](const TypedName& p) { return p.name == term; });
                if (!bound) throw UnknownSymbol(term, e.items[i].line, e.items[i].column);
            } else {
                bool known = std::any_of(dm_.constants.begin(), dm_.constants.end(),
                                         [&](const TypedName& c) { return c.name == term; });
                if (!known) throw UnknownSymbol(term, e.items[i].line, e.items[i].column);
            }
            atom.args.push_back(term);
        }
        if (atom.args.size() != decl->arity())
            syntax("predicate " + name + " expects " + std::to_string(decl->arity()) + " arguments", e);
        return atom;
    }

    DomainModel dm_;
};

class ProblemParser {
public:
    explicit ProblemParser(const DomainModel& domain) : dm_(domain) {}

    ProblemModel parse(const Sexpr& root) {
        if (!root.is_list || root.items.size() < 2 || !root.items[0].is("define")) syntax("expected (define ...)", root);
        const Sexpr& header = expect_list(root.items[1], "(problem <name>)");
        if (header.items.size() != 2 || !header.items[0].is("problem")) syntax("expected (problem <name>)", header);
        pm_.name = atom_text(header.items[1], "problem name");

        const Sexpr* init = nullptr;
        const Sexpr* goal = nullptr;
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const Sexpr& section = expect_list(root.items[i], "problem section");
            const std::string key = lower(std::string(section.head()));
            if (key == ":domain") {
                if (section.items.size() != 2) syntax("expected (:domain <name>)", section);
                pm_.domain_name = atom_text(section.items[1], "domain name");
                if (pm_.domain_name != dm_.name)
                    throw UnknownSymbol(pm_.domain_name, section.items[1].line, section.items[1].column);
            } else if (key == ":objects") {
                pm_.objects = parse_typed_list(section.items, 1);
                for (const auto& o : pm_.objects)
                    for (const auto& t : o.types)
                        if (!dm_.has_type(t)) throw UnknownSymbol(t, section.line, section.column);
            } else if (key == ":init") {
                init = &section;
            } else if (key == ":goal") {
                goal = &section;
            } else if (key == ":requirements" || key == ":metric") {
                // informational only
            } else {
                syntax("unknown problem section " + std::string(section.head()), section);
            }
        }
        if (init) {
            for (std::size_t i = 1; i < init->items.size(); ++i) {
                const Sexpr& a = expect_list(init->items[i], "initial atom");
                if (!a.items.empty() && a.items[0].is("=")) unsupported("numeric fluent in :init", a);
                if (a.items.size() == 3 && a.items[0].is("at") && a.items[1].is_atom() && is_number(a.items[1].atom) &&
                    a.items[2].is_list)
                    unsupported("timed initial literal", a);
                if (!a.items.empty() && a.items[0].is("not")) unsupported("negative initial literal", a);
                add_unique(pm_.init, parse_ground(a));
            }
        }
        if (goal) {
            if (goal->items.size() > 2) syntax("expected a single goal expression", *goal);
            if (goal->items.size() == 2) parse_goal(goal->items[1]);
        }
        return std::move(pm_);
    }

private:
    void parse_goal(const Sexpr& e) {
        expect_list(e, "goal");
        if (e.items.empty()) return;
        if (e.items[0].is("and")) {
            for (std::size_t i = 1; i < e.items.size(); ++i) parse_goal(e.items[i]);
            return;
        }
        if (e.items[0].is("not")) unsupported("negative goal", e);
        for (const char* kw : {"or", "imply", "exists", "forall", "preference"})
            if (e.items[0].is(kw)) unsupported(std::string("'") + kw + "' goal", e);
        add_unique(pm_.goal, parse_ground(e));
    }

    static void add_unique(std::vector<GroundAtom>& into, GroundAtom a) {
        if (std::find(into.begin(), into.end(), a) == into.end()) into.push_back(std::move(a));
    }

    const TypedName* find_object(std::string_view name) const {
        for (const auto& o : pm_.objects)
            if (o.name == name) return &o;
        for (const auto& c : dm_.constants)
            if (c.name == name) return &c;
        return nullptr;
    }

    GroundAtom parse_ground(const Sexpr& e) const {
        if (e.items.empty()) syntax("empty atom", e);
        const std::string& name = atom_text(e.items[0], "predicate name");
        const PredicateDecl* decl = dm_.find_predicate(name);
        if (!decl) throw UnknownSymbol(name, e.line, e.column);
        if (e.items.size() - 1 != decl->arity())
            syntax("predicate " + name + " expects " + std::to_string(decl->arity()) + " arguments", e);
        GroundAtom atom{name, {}};
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const Sexpr& arg = e.items[i];
            const std::string& obj = atom_text(arg, "object");
            const TypedName* o = find_object(obj);
            if (!o) throw UnknownSymbol(obj, arg.line, arg.column);
            if (!dm_.conforms(o->types, decl->params[i - 1].types))
                throw TypeMismatch("object " + obj + " does not fit argument " + std::to_string(i) + " of " + name,
                                   arg.line, arg.column);
            atom.args.push_back(obj);
        }
        return atom;
    }

    const DomainModel& dm_;
    ProblemModel pm_;
};

std::string render_types(const std::vector<std::string>& types) {
    if (types.size() == 1) return types.front();
    std::string out = "(either";
    for (const auto& t : types) out += " " + t;
    return out + ")";
}

std::string render_typed(const std::vector<TypedName>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += " ";
        out += n.name + " - " + render_types(n.types);
    }
    return out;
}

std::string render_atom(const AtomTemplate& a) {
    std::string out = "(" + a.predicate;
    for (const auto& arg : a.args) out += " " + arg;
    return out + ")";
}

}  // namespace

DomainModel parse_domain(std::string_view text) { return DomainParser().parse(detail::read_sexpr(text)); }

ProblemModel parse_problem(std::string_view text, const DomainModel& domain) {
    return ProblemParser(domain).parse(detail::read_sexpr(text));
}

std::string to_pddl(const DomainModel& d) {
    std::ostringstream out;
    out << "(define (domain " << d.name << ")\n";
    if (!d.requirements.empty()) {
        out << "  (:requirements";
        for (const auto& r : d.requirements) out << " " << r;
        out << ")\n";
    }
    if (!d.types.empty()) {
        out << "  (:types";
        for (const auto& t : d.types) out << " " << t.name << " - " << t.parent;
        out << ")\n";
    }
    if (!d.constants.empty()) out << "  (:constants " << render_typed(d.constants) << ")\n";
    out << "  (:predicates";
    for (const auto& p : d.predicates) {
        out << " (" << p.name;
        if (!p.params.empty()) out << " " << render_typed(p.params);
        out << ")";
    }
    out << ")\n";
    for (const auto& op : d.operators) {
        out << "  (" << (op.durative ? ":durative-action " : ":action ") << op.name << "\n";
        out << "    :parameters (" << render_typed(op.params) << ")\n";
        const char* start = op.durative ? "(at start " : "";
        const char* end = op.durative ? "(at end " : "";
        const char* close = op.durative ? ")" : "";
        if (op.durative) out << "    :duration (= ?duration " << to_string(op.duration) << ")\n";
        out << (op.durative ? "    :condition (and" : "    :precondition (and");
        for (const auto& a : op.pre) out << " " << start << render_atom(a) << close;
        out << ")\n    :effect (and";
        for (const auto& a : op.add) out << " " << end << render_atom(a) << close;
        for (const auto& a : op.del) out << " " << end << "(not " << render_atom(a) << ")" << close;
        out << "))\n";
    }
    out << ")\n";
    return out.str();
}

std::string to_pddl(const ProblemModel& p) {
    std::ostringstream out;
    out << "(define (problem " << p.name << ")\n";
    out << "  (:domain " << p.domain_name << ")\n";
    out << "  (:objects " << render_typed(p.objects) << ")\n";
    out << "  (:init";
    for (const auto& a : p.init) out << "\n    " << to_string(a);
    out << ")\n  (:goal (and";
    for (const auto& a : p.goal) out << "\n    " << to_string(a);
    out << ")))\n";
    return out.str();
}

namespace {

std::vector<std::pair<std::size_t, std::vector<std::string>>> directive_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> lines;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream words(raw);
        std::vector<std::string> tokens;
        for (std::string w; words >> w;) tokens.push_back(w);
        if (!tokens.empty()) lines.emplace_back(number, std::move(tokens));
    }
    return lines;
}

}  // namespace

InvariantSpec parse_invariants(std::string_view text, const DomainModel& domain) {
    InvariantSpec spec;
    for (const auto& [line, tokens] : directive_lines(text)) {
        const auto& key = tokens[0];
        if (key == "station-predicate") {
            if (tokens.size() != 2) throw SyntaxError("expected: station-predicate <name>", line, 1);
            if (!domain.find_predicate(tokens[1])) throw UnknownSymbol(tokens[1], line, 1);
            if (std::find(spec.station_predicates.begin(), spec.station_predicates.end(), tokens[1]) ==
                spec.station_predicates.end())
                spec.station_predicates.push_back(tokens[1]);
        } else if (key == "exclusive") {
            if (tokens.size() != 3) throw SyntaxError("expected: exclusive <name> <index>", line, 1);
            const PredicateDecl* decl = domain.find_predicate(tokens[1]);
            if (!decl) throw UnknownSymbol(tokens[1], line, 1);
            std::size_t index = 0;
            try {
                std::size_t used = 0;
                const long v = std::stol(tokens[2], &used);
                if (used != tokens[2].size() || v < 1) throw std::invalid_argument("index");
                index = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                throw SyntaxError("exclusivity index must be a positive integer", line, 1);
            }
            if (index > decl->arity())
                throw SyntaxError("exclusivity index " + tokens[2] + " exceeds arity of " + tokens[1], line, 1);
            spec.exclusivity[tokens[1]] = index;
        } else {
            throw SyntaxError("unknown directive " + key, line, 1);
        }
    }
    if (spec.station_predicates.empty()) throw MissingStationPredicates();
    return spec;
}

CostModel parse_cost(std::string_view text) {
    CostModel cm;
    bool have_mode = false;
    for (const auto& [line, tokens] : directive_lines(text)) {
        const auto& key = tokens[0];
        if (key == "mode" && tokens.size() == 2) {
            if (tokens[1] == "additive")
                cm.mode = CostMode::additive;
            else if (tokens[1] == "max")
                cm.mode = CostMode::max;
            else
                throw SyntaxError("mode must be additive or max", line, 1);
            have_mode = true;
        } else if (key == "value" && tokens.size() == 3) {
            Rational v;
            try {
                v = parse_rational(tokens[2]);
            } catch (const std::exception&) {
                throw SyntaxError("malformed value " + tokens[2], line, 1);
            }
            if (v < 0) throw SyntaxError("values must be non-negative", line, 1);
            cm.location_values[tokens[1]] = v;
        } else if (key == "accrual" && tokens.size() == 2) {
            if (tokens[1] == "loaded")
                cm.accrual = CostAccrual::loaded_flights;
            else if (tokens[1] == "all")
                cm.accrual = CostAccrual::all_flights;
            else
                throw SyntaxError("accrual must be loaded or all", line, 1);
        } else if (key == "location-predicate" && tokens.size() == 2) {
            cm.location_predicate = tokens[1];
        } else if (key == "carrier-predicate" && tokens.size() == 2) {
            cm.carrier_predicate = tokens[1];
        } else {
            throw SyntaxError("malformed cost directive " + key, line, 1);
        }
    }
    if (!have_mode) throw SyntaxError("cost file lacks a mode directive", 0, 0);
    return cm;
}

}  // namespace dae
