#pragma once

#include <stdexcept>
#include <string>

namespace catcon {

/// Malformed stage submissions (dangling rating target, self-rating, ...).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Rejected ledger operation, e.g. out-of-order settlement.
class LedgerError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Invalid run configuration. `field()` names the offending JSON path.
class ConfigError : public std::invalid_argument {
  public:
    ConfigError(std::string field, std::string const& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }

    [[nodiscard]] std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace catcon
