#ifndef PQPKI_PARTY_HPP
#define PQPKI_PARTY_HPP

// Participants of the simulated hierarchy. A Party bundles everything one
// role holds: keys, its own certificate, what it trusts, what it has pinned,
// and the slots the update machinery writes into.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pqpki/bytes.hpp"
#include "pqpki/cert/certmodel.hpp"
#include "pqpki/sig/sigcore.hpp"

namespace pqpki {

// Simulated TPM/TEE contents, provisioned at manufacturing time. The
// manufacturer key lives only here; it must never travel in a message.
struct TeeState {
    sig::KeyPair manufacturer_private_key;
    std::vector<std::string> hardware_ids;
    std::vector<std::string> peripheral_ids;
    // Digests of the enrollment frontends this device will talk to.
    std::set<Bytes> embedded_frontend_digests;
};

struct Party {
    cert::Role role = cert::Role::kDevice;
    // The identity this party claims in CSRs and issued certificates.
    cert::SubjectInfo identity;
    sig::KeyPair keys;
    std::optional<cert::Certificate> certificate;
    std::vector<cert::Certificate> trust_store;
    std::set<Bytes> pinned_digests;
    std::optional<TeeState> tee_state;  // devices must carry one

    // Device-side update slots: last accepted revocation list and firmware.
    std::optional<cert::RevocationList> stored_rl;
    Bytes firmware;

    // Issuing parties share a journal so serials stay unique.
    std::shared_ptr<cert::IssuanceJournal> journal;
};

}  // namespace pqpki

#endif
