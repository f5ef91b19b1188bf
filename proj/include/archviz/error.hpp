#pragma once

#include <stdexcept>
#include <string>

namespace archviz {

/// Base of every error the library raises. `kind()` is the stable,
/// machine-readable name used in CLI diagnostics and HTTP payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define ARCHVIZ_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

ARCHVIZ_DEFINE_ERROR(SchemaError)
ARCHVIZ_DEFINE_ERROR(CycleError)
ARCHVIZ_DEFINE_ERROR(DisconnectedError)
ARCHVIZ_DEFINE_ERROR(ShapeMismatchError)
ARCHVIZ_DEFINE_ERROR(UnsupportedLayerError)
ARCHVIZ_DEFINE_ERROR(DisconnectError)
ARCHVIZ_DEFINE_ERROR(NotASplitError)
ARCHVIZ_DEFINE_ERROR(UnknownNodeError)
ARCHVIZ_DEFINE_ERROR(UnknownAggregationError)
ARCHVIZ_DEFINE_ERROR(InvalidAggregationError)
ARCHVIZ_DEFINE_ERROR(InvalidStyleError)

#undef ARCHVIZ_DEFINE_ERROR

}  // namespace archviz
