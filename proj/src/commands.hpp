#pragma once

#include <optional>
#include <string>

#include "gexp/io.hpp"

namespace gexp::cmd {

struct Outcome {
  io::Json certificate;  // gexpcert/1 document
  Verdict verdict = Verdict::unknown;
  std::string table;     // human-readable summary
  std::string csv;       // optional scan rows
};

/// Dispatches one command. `inst` may be null for commands that build
/// their own input (graph617, family, verify).
Outcome run(const std::string& command, const MeasuredGroupoid* inst, const io::Json& options);

}  // namespace gexp::cmd
