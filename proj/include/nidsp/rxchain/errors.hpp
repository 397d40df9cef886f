#ifndef NIDSP_RXCHAIN_ERRORS_HPP
#define NIDSP_RXCHAIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nidsp {

enum class Stage {
    frame_detection,
    coarse_foe,
    matched_filter,
    timing_recovery,
    frame_sync,
    fine_foe,
    equalizer,
    cpr,
    costmodel,
};

inline const char* stage_name(Stage s) {
    switch (s) {
    case Stage::frame_detection: return "frame_detection";
    case Stage::coarse_foe: return "coarse_foe";
    case Stage::matched_filter: return "matched_filter";
    case Stage::timing_recovery: return "timing_recovery";
    case Stage::frame_sync: return "frame_sync";
    case Stage::fine_foe: return "fine_foe";
    case Stage::equalizer: return "equalizer";
    case Stage::cpr: return "cpr";
    case Stage::costmodel: return "costmodel";
    }
    return "unknown";
}

/// A receiver stage failed; `stage()` says which one.
class StageError : public std::runtime_error {
public:
    StageError(Stage s, const std::string& what)
        : std::runtime_error(std::string(stage_name(s)) + ": " + what), stage_(s) {}
    [[nodiscard]] Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

class DetectionFailure : public StageError {
public:
    using StageError::StageError;
};

class SyncFailure : public StageError {
public:
    explicit SyncFailure(const std::string& what) : StageError(Stage::frame_sync, what) {}
};

class NonConvergence : public StageError {
public:
    using StageError::StageError;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace nidsp

#endif // NIDSP_RXCHAIN_ERRORS_HPP
