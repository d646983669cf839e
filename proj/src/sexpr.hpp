#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dae::detail {

struct Sexpr {
    bool is_list = false;
    std::string atom;
    std::vector<Sexpr> items;
    std::size_t line = 0;
    std::size_t column = 0;

    bool is_atom() const { return !is_list; }
    /// Case-insensitive keyword comparison for atoms.
    bool is(std::string_view keyword) const;
    /// Head keyword of a non-empty list, otherwise empty.
    std::string_view head() const;
};

/// Reads exactly one top-level expression; `;` starts a line comment.
Sexpr read_sexpr(std::string_view text);

}  // namespace dae::detail
