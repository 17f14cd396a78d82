#pragma once

// CSV ingestion of pin data into a skeleton reactor.
//
//   row_label,col_label,z_cm,time_s,feature,value,uncertainty,units
//
// One DataEntry per line. Fields may be double-quoted ("" escapes a quote).

#include <string>
#include <string_view>
#include <vector>

#include "corelens/model.hpp"

namespace corelens {

inline constexpr std::string_view kCsvHeader =
    "row_label,col_label,z_cm,time_s,feature,value,uncertainty,units";

/// Splits CSV text into records. Throws invalid-argument on an unterminated
/// quote. Empty lines are skipped; "\r\n" line ends are accepted.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct IngestOptions {
  std::string assembly;  // definition name; empty = first fuel definition
};

/// Copy of `skeleton` with every CSV row added as pin data of the chosen
/// assembly definition, frozen. Labels are resolved with the assembly's grid
/// labels; x and y come from the pin's lattice position.
/// Throws invalid-argument (with the line number) for malformed rows and
/// not-found for unknown labels or assembly names.
Reactor ingest_csv(const Reactor& skeleton, std::string_view csv_text,
                   const IngestOptions& options = {});

}  // namespace corelens
