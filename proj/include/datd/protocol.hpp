#pragma once

// One oracle task end to end: a consumer publishes a request event, every
// node runs a first truth-discovery round over the data sources, nodes
// submit their answers to the (simulated) oracle contract through
// commit-reveal, the contract runs a second round over the accepted
// reveals and delivers the result to the consumer's callback.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datd/td_core.hpp"

namespace datd {

using TaskId = std::uint64_t;
using Digest = std::array<std::uint8_t, 32>;
using PublicKey = std::vector<std::uint8_t>;

enum class Scheme { baseline, datd };

std::string_view scheme_name(Scheme scheme);

struct Task {
  TaskId id = 0;
  double value = 0.0;
  /// Hidden from every participant; used only for metrics.
  double ground_truth = 0.0;
  std::vector<EntityId> sources;
};

struct CallbackHandle {
  std::uint64_t id = 0;
  auto operator<=>(const CallbackHandle&) const = default;
};

struct RequestEvent {
  TaskId task_id = 0;
  std::vector<EntityId> source_set;
  CallbackHandle callback;
  double task_value = 0.0;
};

/// Throws no-sources on an empty source set and invalid-argument on a
/// non-positive task value.
RequestEvent publish_task(const Task& task, CallbackHandle callback);

// ---- Commitments ----

/// Shortest decimal string that parses back to the same double.
std::string canonical_decimal(double value);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// SHA-256 over canonical_decimal(value) + "|" + lowercase hex(public_key).
Digest commitment_digest(double value, std::span<const std::uint8_t> public_key);

struct Commitment {
  EntityId node;
  Digest digest{};
};

struct Reveal {
  EntityId node;
  double value = 0.0;
  PublicKey public_key;
};

enum class Phase { commit, reveal, closed };

/// Commit-reveal state machine for the second stage of one task. Each
/// participating node is registered with its public key.
class CommitRevealSession {
 public:
  CommitRevealSession(TaskId task, std::map<EntityId, PublicKey> keys);

  /// Computes and records the node's digest. Throws phase-violation,
  /// duplicate-commit or unknown-node.
  Commitment commit(EntityId node, double estimate,
                    std::span<const std::uint8_t> public_key);
  /// Records an externally computed digest; same errors as commit().
  void submit(const Commitment& commitment);

  /// Commit phase -> reveal phase. Throws phase-violation.
  void open_reveal();

  /// Accepts the reveal iff it carries the node's registered key and
  /// reproduces the committed digest. Rejected
  /// reveals are recorded and count as absent. Throws phase-violation,
  /// no-commitment or duplicate-reveal.
  bool reveal(const Reveal& reveal);

  /// Reveal phase -> closed. Throws phase-violation.
  void close();

  Phase phase() const { return phase_; }
  TaskId task() const { return task_; }
  std::size_t commit_count() const { return commitments_.size(); }
  std::size_t accepted_count() const { return accepted_.size(); }
  const std::map<EntityId, double>& accepted() const { return accepted_; }
  const std::vector<EntityId>& rejected() const { return rejected_; }

  /// One observation per node, present only for accepted reveals.
  std::vector<Observation> second_td_inputs() const;

 private:
  void require(Phase expected, const char* action) const;

  TaskId task_;
  std::map<EntityId, PublicKey> keys_;
  Phase phase_ = Phase::commit;
  std::map<EntityId, Digest> commitments_;
  std::map<EntityId, double> accepted_;
  std::vector<EntityId> rejected_;
};

// ---- Two-stage truth discovery ----

/// An oracle node together with its private ledger over the data sources.
struct OracleNode {
  EntityId id;
  PublicKey public_key;
  CredibilityLedger source_ledger;
};

/// Runs the node's first-stage round and commits its ledger.
TruthEstimate first_td(OracleNode& node, const RequestEvent& event,
                       std::span<const Observation> source_reports,
                       Scheme scheme, const TDConfig& config);

/// Contract-side round over accepted reveals. Throws round-failed when no
/// reveal was accepted.
RoundResult second_td(const CredibilityLedger& contract_ledger,
                      const RequestEvent& event,
                      std::span<const Observation> accepted_reveals,
                      Scheme scheme, const TDConfig& config);

struct DeliveryRecord {
  TaskId task_id = 0;
  CallbackHandle callback;
  double truth = 0.0;
};

struct RoundRecord {
  RequestEvent request;
  std::map<EntityId, double> first_td_estimates;
  std::map<EntityId, RoundBreakdown> first_stage;
  /// Value each node put behind its commitment.
  std::map<EntityId, double> submitted;
  std::map<EntityId, double> accepted_reveals;
  std::optional<double> final_truth;
  std::optional<RoundBreakdown> second_stage;
  bool failed = false;
  std::string failure;
};

/// Delivers the final truth to the consumer; appends to the record and the
/// contract's delivery log.
DeliveryRecord callback(CallbackHandle handle, double truth, RoundRecord& record,
                        std::vector<DeliveryRecord>& log);

/// Decides what a node submits given its own first-stage estimate.
using SubmitFn = std::function<double(EntityId node, double estimate)>;

/// Source reports as received by one node.
using SourceFeed = std::function<std::vector<Observation>(EntityId node)>;

/// A simulated oracle network running one TD scheme.
class OracleNetwork {
 public:
  OracleNetwork(std::vector<OracleNode> nodes, Scheme scheme, TDConfig config);

  /// Executes the four stages for one task. Round failures are recorded on
  /// the returned record, not thrown.
  RoundRecord run_task(const Task& task, const SourceFeed& feed,
                       const SubmitFn& submit);
  /// Every node receives the same reports.
  RoundRecord run_task(const Task& task,
                       std::span<const Observation> source_reports,
                       const SubmitFn& submit);

  Scheme scheme() const { return scheme_; }
  const std::vector<OracleNode>& nodes() const { return nodes_; }
  const OracleNode& node(EntityId id) const;
  const CredibilityLedger& contract_ledger() const { return contract_ledger_; }
  const std::vector<DeliveryRecord>& deliveries() const { return deliveries_; }

 private:
  std::vector<OracleNode> nodes_;
  Scheme scheme_;
  TDConfig config_;
  CredibilityLedger contract_ledger_;
  std::vector<DeliveryRecord> deliveries_;
};

}  // namespace datd
