#include "corelens/ingest.hpp"

#include <charconv>
#include <cmath>

namespace corelens {

namespace {

double parse_number(const std::string& field, std::string_view what, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(v)) {
    fail(ErrorCode::invalid_argument, "line " + std::to_string(line) + ": bad " +
                                          std::string(what) + " '" + field + "'");
  }
  return v;
}

std::uint32_t choose_assembly(const Reactor& r, const std::string& name) {
  const auto& defs = r.assembly_defs();
  for (std::uint32_t i = 0; i < defs.size(); ++i) {
    if (name.empty() ? defs[i].type() == AssemblyType::fuel : defs[i].name() == name) return i;
  }
  if (name.empty() && !defs.empty()) return 0;
  fail(ErrorCode::not_found, name.empty() ? "skeleton has no assembly definitions"
                                          : "no assembly definition named '" + name + "'");
}

Position lattice_position(const AssemblyDef& def, ReactorType type, std::size_t r,
                          std::size_t c, double z) {
  const double p = def.rod_pitch();
  const double half = (static_cast<double>(def.size()) - 1.0) / 2.0;
  const double dr = static_cast<double>(r) - half;
  const double dc = static_cast<double>(c) - half;
  if (type == ReactorType::sfr) return {std::sqrt(3.0) / 2.0 * p * dc, p * (dr + dc / 2.0), z};
  return {dc * p, dr * p, z};
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += ch;
        field_started = true;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) {
    fail(ErrorCode::invalid_argument, "unterminated quote at line " + std::to_string(line));
  }
  end_record();
  return records;
}

Reactor ingest_csv(const Reactor& skeleton, std::string_view csv_text,
                   const IngestOptions& options) {
  const auto records = parse_csv(csv_text);
  if (records.empty()) fail(ErrorCode::invalid_argument, "empty CSV");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) {
    if (i) header += ',';
    header += records[0][i];
  }
  if (header != kCsvHeader) {
    fail(ErrorCode::invalid_argument, "CSV header must be '" + std::string(kCsvHeader) + "'");
  }

  Reactor out = skeleton.thawed();
  const auto index = choose_assembly(out, options.assembly);
  // Units go into the reactor table first; the definition reference is taken
  // afterwards because assembly_def() is the mutable accessor.
  std::vector<std::uint32_t> unit_ids(records.size(), 0);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != 8) {
      fail(ErrorCode::invalid_argument, "line " + std::to_string(i + 1) + ": expected 8 fields, got " +
                                            std::to_string(records[i].size()));
    }
    unit_ids[i] = out.add_unit(records[i][7]);
  }
  const ReactorType type = out.type();
  AssemblyDef& def = out.assembly_def(index);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    const std::size_t line = i + 1;
    const auto row = def.labels().find_row(f[0]);
    const auto col = def.labels().find_column(f[1]);
    if (!row || !col) {
      fail(ErrorCode::not_found, "line " + std::to_string(line) + ": no pin '" + f[0] + f[1] +
                                     "' in assembly '" + def.name() + "'");
    }
    DataEntry e;
    const double z = parse_number(f[2], "z_cm", line);
    e.time = parse_number(f[3], "time_s", line);
    e.value = parse_number(f[5], "value", line);
    e.uncertainty = f[6].empty() ? 0.0 : parse_number(f[6], "uncertainty", line);
    e.units_id = unit_ids[i];
    e.position = lattice_position(def, type, *row, *col, z);
    try {
      def.add_pin_data(*row, *col, f[4], e);
    } catch (const Error& err) {
      throw Error(err.code(), "line " + std::to_string(line) + ": " + err.detail());
    }
  }
  out.freeze();
  return out;
}

}  // namespace corelens
