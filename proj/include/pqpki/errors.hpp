#ifndef PQPKI_ERRORS_HPP
#define PQPKI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pqpki {

// Base for every domain error. `code()` is the stable machine-readable
// identifier the CLI prints; messages are free-form diagnostics.
// Verification failure is never an error: verify() returns false.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define PQPKI_DEFINE_ERROR(Name, CodeString)                        \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& what = CodeString)         \
            : Error(CodeString, what) {}                            \
    }

PQPKI_DEFINE_ERROR(ParameterError, "PARAMETER_ERROR");
PQPKI_DEFINE_ERROR(DecodeError, "DECODE_ERROR");
PQPKI_DEFINE_ERROR(EncodeError, "ENCODE_ERROR");
PQPKI_DEFINE_ERROR(StateExhausted, "STATE_EXHAUSTED");
PQPKI_DEFINE_ERROR(OneTimeKeyReuse, "ONE_TIME_KEY_REUSE");
PQPKI_DEFINE_ERROR(CsrInvalid, "CSR_INVALID");
PQPKI_DEFINE_ERROR(CaIneligible, "CA_INELIGIBLE");
PQPKI_DEFINE_ERROR(AttestationUnavailable, "ATTESTATION_UNAVAILABLE");
PQPKI_DEFINE_ERROR(UnwrapFailed, "UNWRAP_FAILED");
PQPKI_DEFINE_ERROR(NothingRecorded, "NOTHING_RECORDED");
PQPKI_DEFINE_ERROR(AclDenied, "ACL_DENIED");
PQPKI_DEFINE_ERROR(RollbackRejected, "ROLLBACK_REJECTED");
PQPKI_DEFINE_ERROR(BundleInvalid, "BUNDLE_INVALID");
PQPKI_DEFINE_ERROR(EvidenceRejected, "EVIDENCE_REJECTED");
PQPKI_DEFINE_ERROR(DuplicateParty, "DUPLICATE_PARTY");
PQPKI_DEFINE_ERROR(AuthFailed, "AUTH_FAILED");
PQPKI_DEFINE_ERROR(SchemeUnavailable, "SCHEME_UNAVAILABLE");
PQPKI_DEFINE_ERROR(ServerBusy, "SERVER_BUSY");
PQPKI_DEFINE_ERROR(SignatureInvalid, "SIGNATURE_INVALID");
PQPKI_DEFINE_ERROR(IoError, "IO_ERROR");

#undef PQPKI_DEFINE_ERROR

}  // namespace pqpki

#endif
