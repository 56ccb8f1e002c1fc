#include "bsim/dates.hpp"

namespace bsim::dates {

namespace {

bool leap(int64_t y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int last_day_of_month(int64_t y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return (m == 2 && leap(y)) ? 29 : d[m - 1];
}

// Howard Hinnant's civil-days algorithms.
int64_t days_from_civil(int64_t y, int m, int d) {
    y -= m <= 2;
    int64_t era = (y >= 0 ? y : y - 399) / 400;
    int64_t yoe = y - era * 400;
    int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int64_t& y, int& m, int& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    int64_t doe = z - era * 146097;
    int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = yoe + era * 400;
    int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    int64_t mp = (5 * doy + 2) / 153;
    d = int(doy - (153 * mp + 2) / 5 + 1);
    m = int(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

} // namespace

int64_t day_index_from_yyyymmdd(uint32_t yyyymmdd) {
    int64_t y = yyyymmdd / 10000;
    int m = int(yyyymmdd / 100 % 100);
    int d = int(yyyymmdd % 100);
    if (m < 1 || m > 12 || d < 1 || d > last_day_of_month(y, m))
        throw Error(Errc::Malformed, "not a calendar date: " + std::to_string(yyyymmdd));
    int64_t idx = days_from_civil(y, m, d);
    if (idx < 0)
        throw Error(Errc::DateBeforeEpoch, "date before 1970-01-01: " + std::to_string(yyyymmdd));
    return idx;
}

uint32_t yyyymmdd_from_day_index(int64_t day) {
    int64_t y;
    int m, d;
    civil_from_days(day, y, m, d);
    return uint32_t(y * 10000 + m * 100 + d);
}

int64_t parse_day(const std::string& text) {
    if (text.empty() || text.size() != 8)
        throw Error(Errc::Malformed, "expected YYYYMMDD, got '" + text + "'");
    uint32_t v = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            throw Error(Errc::Malformed, "expected YYYYMMDD, got '" + text + "'");
        v = v * 10 + uint32_t(c - '0');
    }
    return day_index_from_yyyymmdd(v);
}

std::string format_day(int64_t day) { return std::to_string(yyyymmdd_from_day_index(day)); }

} // namespace bsim::dates
