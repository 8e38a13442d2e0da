#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ffstab/interaction.hpp"
#include "ffstab/stability_bounds.hpp"

namespace ffstab {

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

std::string cell(double v);
std::string cell(long long v);
inline std::string cell(int v) { return cell(static_cast<long long>(v)); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(const std::string& v) { return v; }

std::string to_csv(const CsvTable& t);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Interaction files: kind, local dimension, domain, and terms with real/imaginary matrix parts.
std::string interaction_to_json(const Interaction& phi);
Interaction interaction_from_json(const std::string& text);

// Constants ledger with a formula string next to every value.
std::string bounds_to_json(const BoundConstants& b);

}  // namespace ffstab
