#include "pmp/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "pmp/errors.hpp"

namespace pmp::io {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line_no) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw DomainError(fmt::format("line {}: cannot parse '{}' as a number", line_no, field));
    }
    if (!std::isfinite(value)) {
        throw DomainError(fmt::format("line {}: non-finite value '{}'", line_no, field));
    }
    return value;
}

}  // namespace

model::Dataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    model::Dataset data;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (view.empty()) continue;
        if (!have_header) {
            const auto comma = view.find(',');
            if (comma == std::string_view::npos || trim(view.substr(0, comma)) != "x1" ||
                trim(view.substr(comma + 1)) != "x2") {
                throw DomainError(fmt::format("line {}: expected header 'x1,x2'", line_no));
            }
            have_header = true;
            continue;
        }
        const auto comma = view.find(',');
        if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
            throw DomainError(fmt::format("line {}: expected exactly two fields", line_no));
        }
        data.push_back({parse_number(view.substr(0, comma), line_no),
                        parse_number(view.substr(comma + 1), line_no)});
    }
    if (!have_header) throw DomainError("dataset: missing 'x1,x2' header");
    return data;
}

model::Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError(fmt::format("cannot open '{}'", path));
    return read_dataset(in);
}

void write_dataset(std::ostream& out, const model::Dataset& data) {
    out << "x1,x2\n";
    for (const auto& obs : data) out << fmt::format("{:.17g},{:.17g}\n", obs.x1, obs.x2);
}

}  // namespace pmp::io
