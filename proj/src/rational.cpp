#include "dae/rational.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dae {

namespace {

std::int64_t parse_int(std::string_view digits) {
    std::int64_t value = 0;
    const auto* end = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(digits.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("not a number: " + std::string(digits));
    return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    bool negative = false;
    if (text.front() == '-' || text.front() == '+') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    Rational value;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const auto den = parse_int(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        value = Rational(parse_int(text.substr(0, slash)), den);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (whole.empty() && frac.empty()) throw std::invalid_argument("not a number: .");
        if (frac.size() > 15) throw std::invalid_argument("too many decimals: " + std::string(text));
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
        const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
        value = Rational(w * scale + f, scale);
    } else {
        value = Rational(parse_int(text));
    }
    return negative ? -value : value;
}

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_decimal(const Rational& r, int digits) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << boost::rational_cast<long double>(r);
    return out.str();
}

}  // namespace dae
