// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtp {

enum class Errc {
    // manifest / dataset
    MissingField,
    DuplicateId,
    UnreadableImagePath,
    NTooLarge,
    InsufficientAbsentObjects,
    MalformedGroup,
    ManifestError,
    // prompts / parsing
    EmptyQuestion,
    NoConceptsFound,
    UnparsableAnswer,
    // remote backends
    BackendUnavailable,
    MalformedResponse,
    CassetteMiss,
    Timeout,
    RateLimited,
    BackendError,
    // rendering
    MaskStyleWithoutMasks,
    UndecodableImage,
    DegenerateBox,
    // scoring
    EmptyRecordSet,
    // configuration / misc
    ConfigInvalid,
    IoError,
    Precondition,
};

std::string_view errc_name(Errc c);

/// Project-wide exception. Every failure the library raises carries a
/// stable Errc so callers can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline std::string_view errc_name_impl(Errc c) {
    switch (c) {
    case Errc::MissingField: return "MissingField";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnreadableImagePath: return "UnreadableImagePath";
    case Errc::NTooLarge: return "NTooLarge";
    case Errc::InsufficientAbsentObjects: return "InsufficientAbsentObjects";
    case Errc::MalformedGroup: return "MalformedGroup";
    case Errc::ManifestError: return "ManifestError";
    case Errc::EmptyQuestion: return "EmptyQuestion";
    case Errc::NoConceptsFound: return "NoConceptsFound";
    case Errc::UnparsableAnswer: return "UnparsableAnswer";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::CassetteMiss: return "CassetteMiss";
    case Errc::Timeout: return "Timeout";
    case Errc::RateLimited: return "RateLimited";
    case Errc::BackendError: return "BackendError";
    case Errc::MaskStyleWithoutMasks: return "MaskStyleWithoutMasks";
    case Errc::UndecodableImage: return "UndecodableImage";
    case Errc::DegenerateBox: return "DegenerateBox";
    case Errc::EmptyRecordSet: return "EmptyRecordSet";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
    case Errc::Precondition: return "Precondition";
    }
    return "UnknownError";
}

inline std::string_view errc_name(Errc c) { return errc_name_impl(c); }

} // namespace vtp
