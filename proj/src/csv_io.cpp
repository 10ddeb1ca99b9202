#include "demand_frontier/data.hpp"

#include "demand_frontier/error.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace demand_frontier {

namespace {

int parse_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
    int value = 0;
    if (pos + len > s.size()) throw InvalidInput("bad timestamp '" + std::string(whole) + "'");
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    if (ec != std::errc() || ptr != s.data() + pos + len)
        throw InvalidInput("bad timestamp '" + std::string(whole) + "'");
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    using namespace std::chrono;
    const std::string_view s = trim(text);
    // YYYY-MM-DDTHH:MM[:SS][Z|+00:00]
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        throw InvalidInput("bad timestamp '" + std::string(text) + "'");
    const int y = parse_int(s, 0, 4, text);
    const int mo = parse_int(s, 5, 2, text);
    const int d = parse_int(s, 8, 2, text);
    const int h = parse_int(s, 11, 2, text);
    const int mi = parse_int(s, 14, 2, text);
    int sec = 0;
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        sec = parse_int(s, pos + 1, 2, text);
        pos += 3;
    }
    std::string_view zone = s.substr(pos);
    if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000"))
        throw InvalidInput("timestamp '" + std::string(text) + "' is not UTC");

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) throw InvalidInput("bad timestamp '" + std::string(text) + "'");
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_iso8601_utc(std::int64_t seconds) {
    using namespace std::chrono;
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600,
                       (rem / 60) % 60, rem % 60);
}

std::vector<MeterReading> read_readings_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("readings csv: empty input");
    if (trim(line) != "timestamp,household_id,kwh")
        throw InvalidInput("readings csv: expected header 'timestamp,household_id,kwh'");
    std::vector<MeterReading> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto c1 = row.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
        if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos)
            throw InvalidInput("readings csv: line " + std::to_string(line_no) + " does not have 3 fields");
        MeterReading r;
        r.timestamp = parse_iso8601_utc(row.substr(0, c1));
        r.household_id = std::string(trim(row.substr(c1 + 1, c2 - c1 - 1)));
        if (r.household_id.empty())
            throw InvalidInput("readings csv: line " + std::to_string(line_no) + " has an empty household_id");
        const std::string_view v = trim(row.substr(c2 + 1));
        if (!v.empty()) {
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || ptr != v.data() + v.size())
                throw InvalidInput("readings csv: line " + std::to_string(line_no) + " has a non-numeric kwh field");
            r.demand = x;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MeterReading> read_readings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open readings csv '" + path + "'");
    return read_readings_csv(in);
}

void write_panel_csv(const Panel& panel, std::ostream& out) {
    out << "timestamp,household_id,kwh\n";
    const auto& ids = panel.household_ids();
    std::string buf;
    for (std::size_t t = 0; t < panel.hours(); ++t) {
        const std::string ts = format_iso8601_utc(panel.hour_at(t) * 3600);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const double v = panel.at(t, i);
            buf.clear();
            if (std::isnan(v))
                fmt::format_to(std::back_inserter(buf), "{},{},\n", ts, ids[i]);
            else
                fmt::format_to(std::back_inserter(buf), "{},{},{:.6f}\n", ts, ids[i], v);
            out << buf;
        }
    }
}

void write_panel_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_panel_csv(panel, out);
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace demand_frontier
