#include "datapact/errors.hpp"

#include <utility>

namespace datapact {

namespace {
constexpr std::pair<ErrorCode, std::string_view> kNames[] = {
    {ErrorCode::InsufficientBalance, "InsufficientBalance"},
    {ErrorCode::UnknownAddress, "UnknownAddress"},
    {ErrorCode::Overflow, "Overflow"},
    {ErrorCode::OutOfGas, "OutOfGas"},
    {ErrorCode::BlockGasLimitExceeded, "BlockGasLimitExceeded"},
    {ErrorCode::UnknownContract, "UnknownContract"},
    {ErrorCode::AlreadyDestroyed, "AlreadyDestroyed"},
    {ErrorCode::RefundMismatch, "RefundMismatch"},
    {ErrorCode::SignatureInvalid, "SignatureInvalid"},
    {ErrorCode::LinkDecryptFailure, "LinkDecryptFailure"},
    {ErrorCode::AuthFailure, "AuthFailure"},
    {ErrorCode::DigestMismatch, "DigestMismatch"},
    {ErrorCode::MalformedBundle, "MalformedBundle"},
    {ErrorCode::NameTaken, "NameTaken"},
    {ErrorCode::UnknownProvider, "UnknownProvider"},
    {ErrorCode::NotOwner, "NotOwner"},
    {ErrorCode::UnknownHandle, "UnknownHandle"},
    {ErrorCode::LinkExpired, "LinkExpired"},
    {ErrorCode::UnknownLink, "UnknownLink"},
    {ErrorCode::InvalidTerms, "InvalidTerms"},
    {ErrorCode::BadSignature, "BadSignature"},
    {ErrorCode::RoundLimitExceeded, "RoundLimitExceeded"},
    {ErrorCode::SelfAccept, "SelfAccept"},
    {ErrorCode::InsufficientDeposit, "InsufficientDeposit"},
    {ErrorCode::UnsealedTerms, "UnsealedTerms"},
    {ErrorCode::WrongState, "WrongState"},
    {ErrorCode::NotProvider, "NotProvider"},
    {ErrorCode::NotRequester, "NotRequester"},
    {ErrorCode::NotParty, "NotParty"},
    {ErrorCode::WrongAmount, "WrongAmount"},
    {ErrorCode::LinkNotConsumed, "LinkNotConsumed"},
    {ErrorCode::MissingSignature, "MissingSignature"},
    {ErrorCode::VoteInProgress, "VoteInProgress"},
    {ErrorCode::AlreadyClosed, "AlreadyClosed"},
    {ErrorCode::NotYetExpired, "NotYetExpired"},
    {ErrorCode::EmptyPanel, "EmptyPanel"},
    {ErrorCode::ConflictedArbiter, "ConflictedArbiter"},
    {ErrorCode::CompensationExceedsEscrow, "CompensationExceedsEscrow"},
    {ErrorCode::NotArbiter, "NotArbiter"},
    {ErrorCode::AlreadyVoted, "AlreadyVoted"},
    {ErrorCode::VotingClosed, "VotingClosed"},
    {ErrorCode::WrongPhase, "WrongPhase"},
    {ErrorCode::DeadlineNotReached, "DeadlineNotReached"},
    {ErrorCode::AlreadyExecuted, "AlreadyExecuted"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::AssertionFailed, "AssertionFailed"},
    {ErrorCode::StepError, "StepError"},
    {ErrorCode::InvalidRange, "InvalidRange"},
    {ErrorCode::IoError, "IoError"},
};
}  // namespace

std::string_view error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "UnknownError";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (const auto& [code, n] : kNames) {
    if (n == name) return code;
  }
  throw Error(ErrorCode::ParseError, "unknown error code name: " + std::string(name));
}

}  // namespace datapact
