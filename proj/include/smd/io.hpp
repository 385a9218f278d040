#ifndef SMD_IO_HPP
#define SMD_IO_HPP

/// @file io.hpp
/// @brief CSV emission/parsing with shortest round-trip number formatting.

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "smd/errors.hpp"
#include "smd/sweep.hpp"

namespace smd {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    // strtod accepts inf/nan spellings that to_chars emits
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size())
        throw validation_error("not a number: '" + tmp + "'");
    return v;
}

inline constexpr std::string_view sweep_csv_header = "lambda,mean_mfpt,boundary_residual_l2,mode";
inline constexpr std::string_view profile_csv_header = "theta,t1";

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out(sweep_csv_header);
    out += '\n';
    for (const auto& r : records) {
        out += format_double(r.lambda);
        out += ',';
        out += format_double(r.mean_mfpt);
        out += ',';
        out += format_double(r.boundary_residual_l2);
        out += ',';
        out += r.mode;
        out += '\n';
    }
    return out;
}

inline std::vector<SweepRecord> parse_sweep_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != sweep_csv_header)
        throw validation_error("sweep CSV: missing or wrong header");
    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string_view rest(line);
        SweepRecord r;
        auto take = [&rest, &line]() -> std::string_view {
            const auto pos = rest.find(',');
            if (pos == std::string_view::npos)
                throw validation_error("sweep CSV: malformed row '" + line + "'");
            auto field = rest.substr(0, pos);
            rest.remove_prefix(pos + 1);
            return field;
        };
        r.lambda = parse_double(take());
        r.mean_mfpt = parse_double(take());
        r.boundary_residual_l2 = parse_double(take());
        r.mode = std::string(rest);
        records.push_back(std::move(r));
    }
    return records;
}

/// t1 profile rows: (global angle, surface MFPT).
inline std::string profile_csv(const std::vector<std::pair<double, double>>& rows) {
    std::string out(profile_csv_header);
    out += '\n';
    for (const auto& [theta, t1] : rows) {
        out += format_double(theta);
        out += ',';
        out += format_double(t1);
        out += '\n';
    }
    return out;
}

}  // namespace smd

#endif  // SMD_IO_HPP
