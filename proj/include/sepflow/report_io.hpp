#ifndef SEPFLOW_REPORT_IO_HPP
#define SEPFLOW_REPORT_IO_HPP

#include <string>

#include <json.hpp>

namespace sepflow {

using ordered_json = nlohmann::ordered_json;

/// Serializes with insertion-ordered keys and reals printed to 17 significant
/// digits, so identical reports are byte-identical. Non-finite reals become
/// null.
std::string dump_canonical(const ordered_json& j, int indent = 2);

} // namespace sepflow

#endif
