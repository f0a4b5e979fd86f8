#pragma once

#include <stdexcept>
#include <string>

namespace reflab {

// Exception taxonomy. Each kind carries a stable `kind()` tag so callers and
// reports can dispatch without string-matching what().
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define REFLAB_DEFINE_ERROR(ClassName, kind_tag)                     \
    class ClassName : public Error {                                 \
    public:                                                          \
        explicit ClassName(const std::string& message)               \
            : Error(kind_tag, message) {}                            \
    }

REFLAB_DEFINE_ERROR(SchemaError, "schema");
REFLAB_DEFINE_ERROR(DuplicationError, "duplication");
REFLAB_DEFINE_ERROR(UnknownTypeError, "unknown-type");
REFLAB_DEFINE_ERROR(UnsupportedStrategyError, "unsupported-strategy");
REFLAB_DEFINE_ERROR(TransportError, "transport");
REFLAB_DEFINE_ERROR(CassetteMissError, "cassette-miss");
REFLAB_DEFINE_ERROR(MissingFragmentError, "missing-fragment");
REFLAB_DEFINE_ERROR(TargetMissingError, "target-missing");
REFLAB_DEFINE_ERROR(AmbiguityError, "ambiguity");
REFLAB_DEFINE_ERROR(WorkspaceError, "workspace");
REFLAB_DEFINE_ERROR(BaselineError, "baseline");
REFLAB_DEFINE_ERROR(StateError, "state");
REFLAB_DEFINE_ERROR(EnvironmentError, "environment");
REFLAB_DEFINE_ERROR(HarnessError, "harness");
REFLAB_DEFINE_ERROR(MetricUnavailableError, "metric-unavailable");
REFLAB_DEFINE_ERROR(UndefinedMetricError, "undefined-metric");
REFLAB_DEFINE_ERROR(ConfigurationError, "configuration");
REFLAB_DEFINE_ERROR(EmptyTableError, "empty-table");

#undef REFLAB_DEFINE_ERROR

} // namespace reflab
