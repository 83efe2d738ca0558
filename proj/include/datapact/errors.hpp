#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datapact {

enum class ErrorCode {
  // ledger
  InsufficientBalance,
  UnknownAddress,
  Overflow,
  OutOfGas,
  BlockGasLimitExceeded,
  UnknownContract,
  AlreadyDestroyed,
  RefundMismatch,
  // cryptopipe
  SignatureInvalid,
  LinkDecryptFailure,
  AuthFailure,
  DigestMismatch,
  MalformedBundle,
  // cloud
  NameTaken,
  UnknownProvider,
  NotOwner,
  UnknownHandle,
  LinkExpired,
  UnknownLink,
  // negotiation
  InvalidTerms,
  BadSignature,
  RoundLimitExceeded,
  SelfAccept,
  // datashare
  InsufficientDeposit,
  UnsealedTerms,
  WrongState,
  NotProvider,
  NotRequester,
  NotParty,
  WrongAmount,
  LinkNotConsumed,
  MissingSignature,
  VoteInProgress,
  AlreadyClosed,
  NotYetExpired,
  // congress
  EmptyPanel,
  ConflictedArbiter,
  CompensationExceedsEscrow,
  NotArbiter,
  AlreadyVoted,
  VotingClosed,
  WrongPhase,
  DeadlineNotReached,
  AlreadyExecuted,
  // scenario / io
  ParseError,
  AssertionFailed,
  StepError,
  InvalidRange,
  IoError,
};

std::string_view error_code_name(ErrorCode code);
ErrorCode error_code_from_name(std::string_view name);  // throws ParseError

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace datapact
