#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "vppflex/model/types.hpp"
#include "vppflex/model/validate.hpp"

namespace vppflex::io {

/// A file that is missing, malformed or does not fit the schema. The message
/// names the file and the line, row or key at fault.
class InputError : public std::runtime_error {
 public:
  InputError(std::string file, const std::string& detail)
      : std::runtime_error(file + ": " + detail), file_(std::move(file)) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

/// The instance parsed but broke physical or structural invariants.
class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(model::ValidationReport report);
  const model::ValidationReport& report() const { return report_; }

 private:
  model::ValidationReport report_;
};

/// Instance directory layout.
inline constexpr const char* kNetworkFile = "network.json";
inline constexpr const char* kDersFile = "ders.json";
inline constexpr const char* kProfilesFile = "profiles.csv";
inline constexpr const char* kPricesFile = "prices.csv";
inline constexpr const char* kMeteringFile = "metering.json";

/// Parses the five instance files without validating the result.
model::VppInstance read_instance(const std::filesystem::path& dir);

/// read_instance followed by validate_instance; throws InvalidInstance when
/// the report holds an error.
model::VppInstance load_instance(const std::filesystem::path& dir);

/// Writes the five files; read_instance of the result gives back `instance`.
void save_instance(const model::VppInstance& instance, const std::filesystem::path& dir);

/// Per-file text, for callers that keep instances in memory.
std::string network_json(const model::VppInstance& instance);
std::string ders_json(const model::VppInstance& instance);
std::string profiles_csv(const model::VppInstance& instance);
std::string prices_csv(const model::VppInstance& instance);
std::string metering_json(const model::VppInstance& instance);

/// Shortest text that reads back to the same double ("inf", "-inf", "nan"
/// for non-finite values).
std::string format_number(double v);

}  // namespace vppflex::io
