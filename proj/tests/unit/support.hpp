#pragma once

#include <string>
#include <vector>

#include "dae/harness.hpp"
#include "dae/task.hpp"

namespace testing {

struct Zeno {
    dae::MiniZeno model = dae::build_mini_zeno();
    dae::GroundTask task = dae::ground(model.domain, model.problem);

    dae::AtomId atom(const std::string& pred, std::vector<std::string> args) const {
        const dae::AtomId a = task.find_atom({pred, std::move(args)});
        if (a == task.atom_count()) throw std::runtime_error("no such atom");
        return a;
    }
    dae::ActionId action(const std::string& name, const std::vector<std::string>& args) const {
        for (const auto& a : task.actions)
            if (a.name == name && a.args == args) return a.id;
        throw std::runtime_error("no such action " + name);
    }
};

/// The shared mini-Zeno instance; grounding once keeps the suites fast.
inline const Zeno& zeno() {
    static const Zeno z;
    return z;
}

}  // namespace testing
