#pragma once

#include <stdexcept>
#include <string>

namespace corneal {

/// Pipeline stage that raised an error. The numeric value doubles as the CLI exit code.
enum class Stage : int {
  None = 0,
  Config = 2,
  Io = 3,
  Eye = 4,
  Limbus = 5,
  Pose = 6,
  Unwrap = 7,
  Objects = 8,
  Plane = 9,
  Position = 10,
  Dataset = 11,
  Geometry = 12,
};

const char* stage_name(Stage s);

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what) : std::runtime_error(what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

}  // namespace corneal
