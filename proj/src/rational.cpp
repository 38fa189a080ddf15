#include "stpi/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace stpi {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
    mpz_class z(std::string(s), 10);
    return neg ? mpz_class(-z) : z;
}

double log2z(const mpz_class& z) {
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) throw std::invalid_argument("empty rational");

    Rational q;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        mpz_class num = parse_integer(text.substr(0, slash), text);
        mpz_class den = parse_integer(text.substr(slash + 1), text);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        q = Rational(num, den);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view ip = text.substr(0, dot), fp = text.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip.remove_prefix(1);
        if (ip.empty()) ip = "0";
        if (!all_digits(ip) || !all_digits(fp))
            throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
        mpz_class num = mpz_class(std::string(ip), 10) * den + mpz_class(std::string(fp), 10);
        q = Rational(neg ? mpz_class(-num) : num, den);
    } else {
        q = Rational(parse_integer(text, text));
    }
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

double log2q(const Rational& q) {
    if (q <= 0) throw std::domain_error("log2 of non-positive rational " + to_string(q));
    return log2z(q.get_num()) - log2z(q.get_den());
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace stpi
