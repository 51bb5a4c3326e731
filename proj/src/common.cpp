#include "jamguard/common.hpp"

namespace jamguard {

Label parse_label(const std::string& s) {
    if (s == "pure" || s == "0") return Label::pure;
    if (s == "jammed" || s == "1") return Label::jammed;
    throw DomainError("unknown label '" + s + "'");
}

double mean_power(const std::vector<cplx>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

}  // namespace jamguard
