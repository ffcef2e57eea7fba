#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dagsim {

enum class Errc {
  PowerSumInvalid,
  CapacityExceedsMempool,
  UnknownNode,
  NonPositiveInterval,
  InvalidConfig,
  InvalidTopology,
  InvalidArgument,
  DuplicateBlock,
  UnknownFee,
  ZeroTotalReward,
  EmptyInput,
  UnknownExperiment,
  Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::PowerSumInvalid: return "PowerSumInvalid";
    case Errc::CapacityExceedsMempool: return "CapacityExceedsMempool";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NonPositiveInterval: return "NonPositiveInterval";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidTopology: return "InvalidTopology";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DuplicateBlock: return "DuplicateBlock";
    case Errc::UnknownFee: return "UnknownFee";
    case Errc::ZeroTotalReward: return "ZeroTotalReward";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownExperiment: return "UnknownExperiment";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code; the
// message always starts with the code name.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dagsim
