// errors.hpp - shared error codes for store and query failures
#pragma once

#include <stdexcept>
#include <string>

namespace hkr {

enum class ErrCode {
  DuplicateSpace,
  UnknownSpace,
  DuplicateNode,
  UnknownNode,
  DuplicateLink,
  CycleDetected,
  KindMismatch,
  UnknownScript,
  DuplicateScript,
  InvalidScript,
  UndeclaredRole,
  UnboundRole,
  EntryConditionFailed,
  NoAlignment,
  AlreadyCompleted,
  UnknownEpisode,
  DanglingScriptElement,
  DanglingNode,
  RoleLinkToNonClass,
  UnlinkedRole,
  NoOpenEpisode,
  MalformedQuery,
  NothingToExplain,
};

inline const char* to_string(ErrCode c) {
  switch (c) {
    case ErrCode::DuplicateSpace: return "DuplicateSpace";
    case ErrCode::UnknownSpace: return "UnknownSpace";
    case ErrCode::DuplicateNode: return "DuplicateNode";
    case ErrCode::UnknownNode: return "UnknownNode";
    case ErrCode::DuplicateLink: return "DuplicateLink";
    case ErrCode::CycleDetected: return "CycleDetected";
    case ErrCode::KindMismatch: return "KindMismatch";
    case ErrCode::UnknownScript: return "UnknownScript";
    case ErrCode::DuplicateScript: return "DuplicateScript";
    case ErrCode::InvalidScript: return "InvalidScript";
    case ErrCode::UndeclaredRole: return "UndeclaredRole";
    case ErrCode::UnboundRole: return "UnboundRole";
    case ErrCode::EntryConditionFailed: return "EntryConditionFailed";
    case ErrCode::NoAlignment: return "NoAlignment";
    case ErrCode::AlreadyCompleted: return "AlreadyCompleted";
    case ErrCode::UnknownEpisode: return "UnknownEpisode";
    case ErrCode::DanglingScriptElement: return "DanglingScriptElement";
    case ErrCode::DanglingNode: return "DanglingNode";
    case ErrCode::RoleLinkToNonClass: return "RoleLinkToNonClass";
    case ErrCode::UnlinkedRole: return "UnlinkedRole";
    case ErrCode::NoOpenEpisode: return "NoOpenEpisode";
    case ErrCode::MalformedQuery: return "MalformedQuery";
    case ErrCode::NothingToExplain: return "NothingToExplain";
  }
  return "UnknownError";
}

// All store and query failures carry a code so callers (notably the TELL
// layer, which turns them into Rejected results) can dispatch without
// matching on message text.
class KbError : public std::runtime_error {
 public:
  KbError(ErrCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, const std::string& message) {
  throw KbError(code, message);
}

}  // namespace hkr
