#include "datd/protocol.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace datd {

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::datd ? "datd" : "baseline";
}

RequestEvent publish_task(const Task& task, CallbackHandle callback) {
  if (task.sources.empty()) throw Error(ErrorCode::no_sources);
  if (!(task.value > 0.0) || !std::isfinite(task.value)) {
    throw Error(ErrorCode::invalid_argument, "task value must be positive");
  }
  return RequestEvent{task.id, task.sources, callback, task.value};
}

std::string canonical_decimal(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    throw Error(ErrorCode::invalid_argument, "unformattable value");
  }
  return std::string(buf, end);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Digest commitment_digest(double value, std::span<const std::uint8_t> public_key) {
  const std::string preimage =
      canonical_decimal(value) + "|" + to_hex(public_key);
  Digest digest{};
  SHA256(reinterpret_cast<const unsigned char*>(preimage.data()),
         preimage.size(), digest.data());
  return digest;
}

// ---- CommitRevealSession ----

CommitRevealSession::CommitRevealSession(TaskId task,
                                         std::map<EntityId, PublicKey> keys)
    : task_(task), keys_(std::move(keys)) {}

void CommitRevealSession::require(Phase expected, const char* action) const {
  if (phase_ != expected) {
    throw Error(ErrorCode::phase_violation,
                std::string(action) + " in wrong phase for task " +
                    std::to_string(task_));
  }
}

Commitment CommitRevealSession::commit(EntityId node, double estimate,
                                       std::span<const std::uint8_t> public_key) {
  Commitment c{node, commitment_digest(estimate, public_key)};
  submit(c);
  return c;
}

void CommitRevealSession::submit(const Commitment& commitment) {
  require(Phase::commit, "commit");
  if (!keys_.contains(commitment.node)) {
    throw Error(ErrorCode::unknown_node, std::to_string(commitment.node.value));
  }
  if (!commitments_.emplace(commitment.node, commitment.digest).second) {
    throw Error(ErrorCode::duplicate_commit,
                std::to_string(commitment.node.value));
  }
}

void CommitRevealSession::open_reveal() {
  require(Phase::commit, "open reveal");
  phase_ = Phase::reveal;
}

bool CommitRevealSession::reveal(const Reveal& reveal) {
  require(Phase::reveal, "reveal");
  auto it = commitments_.find(reveal.node);
  if (it == commitments_.end()) {
    throw Error(ErrorCode::no_commitment, std::to_string(reveal.node.value));
  }
  const bool seen =
      accepted_.contains(reveal.node) ||
      std::find(rejected_.begin(), rejected_.end(), reveal.node) != rejected_.end();
  if (seen) {
    throw Error(ErrorCode::duplicate_reveal, std::to_string(reveal.node.value));
  }
  const PublicKey& key = keys_.at(reveal.node);
  const bool ok = std::isfinite(reveal.value) && reveal.public_key == key &&
                  commitment_digest(reveal.value, key) == it->second;
  if (ok) {
    accepted_.emplace(reveal.node, reveal.value);
  } else {
    rejected_.push_back(reveal.node);
  }
  return ok;
}

void CommitRevealSession::close() {
  require(Phase::reveal, "close");
  phase_ = Phase::closed;
}

std::vector<Observation> CommitRevealSession::second_td_inputs() const {
  std::vector<Observation> out;
  out.reserve(keys_.size());
  for (const auto& [node, key] : keys_) {
    auto it = accepted_.find(node);
    if (it == accepted_.end()) {
      out.push_back({node, 0.0, false});
    } else {
      out.push_back({node, it->second, true});
    }
  }
  return out;
}

// ---- Two-stage TD ----

namespace {

RoundResult run_round(std::span<const Observation> observations,
                      const CredibilityLedger& ledger, double task_value,
                      Scheme scheme, const TDConfig& config) {
  if (scheme == Scheme::datd) {
    return run_datd_round(observations, ledger, task_value, config);
  }
  return run_baseline_round(observations, ledger, config);
}

}  // namespace

TruthEstimate first_td(OracleNode& node, const RequestEvent& event,
                       std::span<const Observation> source_reports,
                       Scheme scheme, const TDConfig& config) {
  std::vector<Observation> observations;
  observations.reserve(event.source_set.size());
  for (EntityId source : event.source_set) {
    auto it = std::find_if(source_reports.begin(), source_reports.end(),
                           [&](const Observation& o) { return o.source == source; });
    if (it == source_reports.end()) {
      observations.push_back({source, 0.0, false});
    } else {
      observations.push_back(*it);
    }
  }
  RoundResult result = run_round(observations, node.source_ledger,
                                 event.task_value, scheme, config);
  node.source_ledger = std::move(result.ledger);
  return std::move(result.estimate);
}

RoundResult second_td(const CredibilityLedger& contract_ledger,
                      const RequestEvent& event,
                      std::span<const Observation> accepted_reveals,
                      Scheme scheme, const TDConfig& config) {
  const bool any = std::any_of(accepted_reveals.begin(), accepted_reveals.end(),
                               [](const Observation& o) { return o.present; });
  if (!any) {
    throw Error(ErrorCode::round_failed,
                "no accepted reveals for task " + std::to_string(event.task_id));
  }
  return run_round(accepted_reveals, contract_ledger, event.task_value, scheme,
                   config);
}

DeliveryRecord callback(CallbackHandle handle, double truth, RoundRecord& record,
                        std::vector<DeliveryRecord>& log) {
  record.final_truth = truth;
  DeliveryRecord delivery{record.request.task_id, handle, truth};
  log.push_back(delivery);
  return delivery;
}

// ---- OracleNetwork ----

OracleNetwork::OracleNetwork(std::vector<OracleNode> nodes, Scheme scheme,
                             TDConfig config)
    : nodes_(std::move(nodes)), scheme_(scheme), config_(config) {
  validate(config_);
  std::sort(nodes_.begin(), nodes_.end(),
            [](const OracleNode& a, const OracleNode& b) { return a.id < b.id; });
}

const OracleNode& OracleNetwork::node(EntityId id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return n;
  }
  throw Error(ErrorCode::no_such_node, std::to_string(id.value));
}

RoundRecord OracleNetwork::run_task(const Task& task,
                                    std::span<const Observation> source_reports,
                                    const SubmitFn& submit) {
  const std::vector<Observation> shared(source_reports.begin(), source_reports.end());
  return run_task(task, [&](EntityId) { return shared; }, submit);
}

RoundRecord OracleNetwork::run_task(const Task& task, const SourceFeed& feed,
                                    const SubmitFn& submit) {
  RoundRecord record;
  record.request = publish_task(task, CallbackHandle{task.id});
  const RequestEvent& event = record.request;

  std::map<EntityId, PublicKey> keys;
  for (const auto& n : nodes_) keys.emplace(n.id, n.public_key);
  CommitRevealSession session(event.task_id, std::move(keys));

  for (auto& n : nodes_) {
    TruthEstimate estimate = first_td(n, event, feed(n.id), scheme_, config_);
    record.first_td_estimates[n.id] = estimate.value;
    record.first_stage[n.id] = std::move(estimate.breakdown);
    const double value = submit ? submit(n.id, estimate.value) : estimate.value;
    record.submitted[n.id] = value;
    session.commit(n.id, value, n.public_key);
  }

  session.open_reveal();
  for (const auto& n : nodes_) {
    session.reveal(Reveal{n.id, record.submitted.at(n.id), n.public_key});
  }
  session.close();
  record.accepted_reveals = session.accepted();

  const std::vector<Observation> inputs = session.second_td_inputs();
  try {
    RoundResult result =
        second_td(contract_ledger_, event, inputs, scheme_, config_);
    contract_ledger_ = std::move(result.ledger);
    record.second_stage = std::move(result.estimate.breakdown);
    callback(event.callback, result.estimate.value, record, deliveries_);
  } catch (const Error& e) {
    record.failed = true;
    record.failure = e.what();
  }
  return record;
}

}  // namespace datd
