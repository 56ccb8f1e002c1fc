#include "bsim/fixedpoint.hpp"

namespace bsim::fixedpoint {

namespace {

int power_of_ten_exponent(uint64_t scale) {
    int e = 0;
    uint64_t v = 1;
    while (v < scale) {
        v *= 10;
        ++e;
        if (e > 18) break;
    }
    if (v != scale) throw Error(Errc::InvalidArgument, "scale must be a power of ten");
    return e;
}

} // namespace

uint64_t parse_scaled(const std::string& text, uint64_t scale) {
    int exp = power_of_ten_exponent(scale);
    if (text.empty()) throw Error(Errc::Malformed, "empty numeric literal");
    size_t i = 0;
    if (text[0] == '-') throw Error(Errc::NegativeValue, "negative value: " + text);
    std::string intpart, fracpart;
    bool seen_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            (seen_dot ? fracpart : intpart) += c;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            throw Error(Errc::Malformed, "bad numeric literal: " + text);
        }
    }
    if (!seen_digit) throw Error(Errc::Malformed, "bad numeric literal: " + text);

    // shift the decimal point right by exp digits
    std::string digits = intpart;
    for (int k = 0; k < exp; ++k) digits += k < int(fracpart.size()) ? fracpart[size_t(k)] : '0';
    bool round_up = exp < int(fracpart.size()) && fracpart[size_t(exp)] >= '5';

    uint64_t v = 0;
    for (char c : digits) {
        uint64_t next = v * 10 + uint64_t(c - '0');
        if (next / 10 != v || v > UINT64_MAX / 10)
            throw Error(Errc::Overflow, "numeric literal too large: " + text);
        v = next;
    }
    if (round_up) {
        if (v == UINT64_MAX) throw Error(Errc::Overflow, "numeric literal too large: " + text);
        ++v;
    }
    return v;
}

std::string format_scaled(uint64_t value, uint64_t scale) {
    int exp = power_of_ten_exponent(scale);
    if (exp == 0) return std::to_string(value);
    std::string digits = std::to_string(value);
    if (int(digits.size()) <= exp) digits.insert(0, size_t(exp + 1) - digits.size(), '0');
    digits.insert(digits.size() - size_t(exp), ".");
    while (digits.back() == '0') digits.pop_back();
    if (digits.back() == '.') digits.pop_back();
    return digits;
}

} // namespace bsim::fixedpoint
