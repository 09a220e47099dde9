#include "spoofbench/minirep.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <thread>

#include "spoofbench/errors.hpp"

namespace spoofbench {
namespace {

constexpr std::size_t kMaxLength = 31;
constexpr Symbol kBlank = 0xff;

using Tape = std::array<Symbol, 2 * kMaxLength + 2>;

bool holds_copy(const Tape& tape, const Symbol* program, std::size_t length) {
  const std::size_t tape_size = 2 * length + 2;
  for (std::size_t start = length; start + length <= tape_size; ++start) {
    if (std::equal(program, program + length, tape.begin() + static_cast<std::ptrdiff_t>(start))) {
      return true;
    }
  }
  return false;
}

ViabilityVerdict run(const Symbol* program, std::size_t length, std::uint64_t budget) {
  const std::size_t tape_size = 2 * length + 2;
  Tape tape;
  std::fill(tape.begin(), tape.begin() + static_cast<std::ptrdiff_t>(tape_size), kBlank);
  std::copy(program, program + length, tape.begin());

  std::size_t ip = 0;
  std::size_t read = 0;
  std::size_t write = length + 1;
  ViabilityVerdict verdict;
  while (verdict.steps < budget) {
    ++verdict.steps;
    const Symbol op = tape[ip];
    switch (static_cast<MiniRepOp>(op)) {
      case MiniRepOp::kCopy:
        tape[write] = tape[read];
        read = (read + 1) % tape_size;
        write = (write + 1) % tape_size;
        break;
      case MiniRepOp::kJumpIfNotDone:
        if (read < length) {
          ip = 0;
          continue;
        }
        break;
      case MiniRepOp::kHalt:
        verdict.viable = holds_copy(tape, program, length);
        verdict.reason =
            verdict.viable ? ViabilityReason::kCopiedSelf : ViabilityReason::kHaltedWithoutCopy;
        return verdict;
      case MiniRepOp::kAdvanceRead:
        read = (read + 1) % tape_size;
        break;
      case MiniRepOp::kAdvanceWrite:
        write = (write + 1) % tape_size;
        break;
      default:  // nops, and blanks written over the program
        break;
    }
    ip = (ip + 1) % length;
  }
  verdict.reason = ViabilityReason::kBudgetExhausted;
  return verdict;
}

}  // namespace

void MiniRepConfig::validate() const {
  if (k < 2 || k > kMiniRepMaxOps) throw std::invalid_argument("MiniRep k must be in [2, 8]");
  if (length < 1 || length > kMaxLength) {
    throw std::invalid_argument("MiniRep length must be in [1, 31]");
  }
  if (version != kMiniRepVersion) {
    throw std::invalid_argument("unsupported MiniRep semantics version '" + version + "'");
  }
}

std::string_view to_string(ViabilityReason r) {
  switch (r) {
    case ViabilityReason::kCopiedSelf: return "copied-self";
    case ViabilityReason::kBudgetExhausted: return "budget-exhausted";
    case ViabilityReason::kHaltedWithoutCopy: return "halted-without-copy";
  }
  return "unknown";
}

ViabilityVerdict vm_check_viability(const Sequence& program, const MiniRepConfig& config) {
  config.validate();
  if (program.length() != config.length) {
    throw std::invalid_argument("program length does not match MiniRep config");
  }
  for (Symbol s : program.symbols) {
    if (s >= config.k) throw std::invalid_argument("program uses an opcode outside the config");
  }
  return run(program.symbols.data(), config.length, config.step_budget);
}

ReplicatorSet enumerate_landscape(const MiniRepConfig& config, unsigned jobs) {
  config.validate();
  const std::uint64_t total = config.program_count();
  if (total > config.enumeration_limit) {
    throw UsageError("MiniRep space of " + std::to_string(total) +
                     " programs exceeds the enumeration limit of " +
                     std::to_string(config.enumeration_limit) +
                     "; use a smaller k or length");
  }
  jobs = std::max(1u, jobs);
  std::vector<std::vector<std::uint64_t>> found(jobs);

  auto worker = [&](unsigned shard) {
    const std::uint64_t begin = total * shard / jobs;
    const std::uint64_t end = total * (shard + 1) / jobs;
    if (begin >= end) return;
    Sequence program = decode(begin, config.k, config.length);
    for (std::uint64_t code = begin; code < end; ++code) {
      if (run(program.symbols.data(), config.length, config.step_budget).viable) {
        found[shard].push_back(code);
      }
      // odometer increment, last symbol fastest
      for (std::size_t i = config.length; i > 0; --i) {
        if (++program.symbols[i - 1] < config.k) break;
        program.symbols[i - 1] = 0;
      }
    }
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned s = 0; s < jobs; ++s) threads.emplace_back(worker, s);
  }

  std::vector<Sequence> members;
  for (const auto& shard : found) {
    for (auto code : shard) members.push_back(decode(code, config.k, config.length));
  }
  return ReplicatorSet(config.alphabet(), config.length, std::move(members));
}

}  // namespace spoofbench
