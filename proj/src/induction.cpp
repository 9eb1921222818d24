#include "gietlab/induction.hpp"

#include "gietlab/errors.hpp"

namespace gietlab {

BigInt matrix_norm(const IntegerMatrix& A) {
  BigInt s = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) s += abs(A(i, j));
  return s;
}

bool is_positive(const IntegerMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (A(i, j) <= 0) return false;
  return true;
}

IntegerMatrix elementary_matrix(int d, int winner, int loser) {
  IntegerMatrix E = IntegerMatrix::Identity(d, d);
  E(loser, winner) = 1;
  return E;
}

namespace {

template <class S>
struct Accumulator {
  Giet<S> map;
  IntegerMatrix product, block;
  std::vector<std::vector<int>> words;
  std::vector<Winner> winners;
  long rv = 0;
  long runs = 0;
  long long letters = 0, letter_cap;

  explicit Accumulator(const Giet<S>& T, long long cap = AccelerationOptions{}.itinerary_cap)
      : map(T), letter_cap(cap) {
    const int d = T.d();
    product = IntegerMatrix::Identity(d, d);
    block = product;
    words.resize(d);
    for (int j = 0; j < d; ++j) words[j] = {j};
    letters = d;
  }

  Winner step() {
    RauzyMove m = map.rauzy_veech_in_place();
    product.row(m.loser) += product.row(m.winner);
    block.row(m.loser) += block.row(m.winner);
    if (!words.empty()) {
      auto& lw = words[m.loser];
      const auto& ww = words[m.winner];
      letters += static_cast<long long>(ww.size());
      if (letters > letter_cap) {
        words.clear();
      } else if (m.side == Winner::Top) {
        lw.insert(lw.end(), ww.begin(), ww.end());
      } else {
        lw.insert(lw.begin(), ww.begin(), ww.end());
      }
    }
    winners.push_back(m.side);
    ++rv;
    return m.side;
  }

  // A maximal run of steps with the same winner. A tie right after the run
  // ends it; the next call reports the connection.
  void zorich_run(long cap) {
    const Winner side = step();
    long length = 1;
    for (;;) {
      Winner next;
      try {
        next = map.peek_winner();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericalConnection) throw;
        break;
      }
      if (next != side) break;
      if (length >= cap)
        throw Error(ErrorCode::RunLimitExceeded, "Zorich run exceeds the configured cap", length);
      step();
      ++length;
    }
    ++runs;
  }

  InductionRecord<S> finish(std::vector<long> block_ends = {}) {
    InductionRecord<S> r;
    r.matrix = std::move(product);
    r.rv_steps = rv;
    r.zorich_runs = runs;
    r.block_ends = std::move(block_ends);
    r.winners = std::move(winners);
    r.itineraries = std::move(words);
    r.induced = std::move(map);
    return r;
  }
};

}  // namespace

template <class S>
RvStep<S> rv_step(const Giet<S>& T) {
  Giet<S> map = T;
  RauzyMove m = map.rauzy_veech_in_place();
  return {std::move(map), elementary_matrix(T.d(), m.winner, m.loser), m.side};
}

template <class S>
InductionRecord<S> rv_record(const Giet<S>& T) {
  Accumulator<S> acc(T);
  acc.step();
  return acc.finish();
}

template <class S>
InductionRecord<S> zorich_step(const Giet<S>& T, const AccelerationOptions& options) {
  Accumulator<S> acc(T, options.itinerary_cap);
  acc.zorich_run(options.run_cap);
  return acc.finish();
}

template <class S>
InductionRecord<S> positive_accel_step(const Giet<S>& T, const AccelerationOptions& options) {
  Accumulator<S> acc(T, options.itinerary_cap);
  std::vector<long> ends;
  for (int b = 0; b < options.positive_blocks; ++b) {
    const int d = T.d();
    acc.block = IntegerMatrix::Identity(d, d);
    long runs = 0;
    do {
      if (runs >= options.positivity_cap)
        throw Error(ErrorCode::PositivityTimeout, "no positive block within the configured cap");
      acc.zorich_run(options.run_cap);
      ++runs;
    } while (!is_positive(acc.block));
    ends.push_back(acc.rv);
  }
  return acc.finish(std::move(ends));
}

template <class S>
InductionChain<S>::InductionChain(Giet<S> base, Acceleration kind, AccelerationOptions options)
    : base_(std::move(base)), kind_(kind), options_(options) {
  heights_.push_back(IntegerVector::Ones(base_.d()));
  times_.push_back(0);
}

template <class S>
void InductionChain<S>::extend_to(int depth) {
  while (this->depth() < depth) {
    const Giet<S>& current = level(this->depth());
    InductionRecord<S> r;
    switch (kind_) {
      case Acceleration::RauzyVeech: r = rv_record(current); break;
      case Acceleration::Zorich: r = zorich_step(current, options_); break;
      case Acceleration::Positive: r = positive_accel_step(current, options_); break;
    }
    r.index = this->depth();
    IntegerVector q = r.matrix * heights_.back();
    heights_.push_back(std::move(q));
    times_.push_back(times_.back() + r.rv_steps);
    records_.push_back(std::move(r));
  }
}

template <class S>
const Giet<S>& InductionChain<S>::level(int k) const {
  if (k < 0 || k > depth()) throw Error(ErrorCode::RangeError, "level beyond the computed depth", k);
  return k == 0 ? base_ : records_[k - 1].induced;
}

template <class S>
const InductionRecord<S>& InductionChain<S>::record(int k) const {
  if (k < 0 || k >= depth()) throw Error(ErrorCode::RangeError, "record beyond the computed depth", k);
  return records_[k];
}

template <class S>
const IntegerVector& InductionChain<S>::heights(int k) const {
  if (k < 0 || k > depth()) throw Error(ErrorCode::RangeError, "level beyond the computed depth", k);
  return heights_[k];
}

template <class S>
long InductionChain<S>::rv_time(int k) const {
  if (k < 0 || k > depth()) throw Error(ErrorCode::RangeError, "level beyond the computed depth", k);
  return times_[k];
}

template <class S>
IntegerMatrix cocycle_product(const InductionChain<S>& chain, int m, int n) {
  if (m < 0 || m > n || n > chain.depth())
    throw Error(ErrorCode::RangeError, "cocycle indices out of range");
  const int d = chain.base().d();
  IntegerMatrix Q = IntegerMatrix::Identity(d, d);
  for (int i = m; i < n; ++i) Q = (chain.matrix(i) * Q).eval();
  return Q;
}

template <class S>
Giet<S> renormalized_map(const InductionChain<S>& chain, int k) {
  return rescaled(chain.level(k), S(1));
}

template <class S>
Giet<S> renormalized_map(const Giet<S>& T, int k, Acceleration kind,
                         const AccelerationOptions& options) {
  InductionChain<S> chain(T, kind, options);
  chain.extend_to(k);
  return renormalized_map(chain, k);
}

#define GIETLAB_INSTANTIATE(S)                                                               \
  template RvStep<S> rv_step<S>(const Giet<S>&);                                             \
  template InductionRecord<S> rv_record<S>(const Giet<S>&);                                  \
  template InductionRecord<S> zorich_step<S>(const Giet<S>&, const AccelerationOptions&);    \
  template InductionRecord<S> positive_accel_step<S>(const Giet<S>&,                         \
                                                     const AccelerationOptions&);            \
  template class InductionChain<S>;                                                          \
  template IntegerMatrix cocycle_product<S>(const InductionChain<S>&, int, int);             \
  template Giet<S> renormalized_map<S>(const InductionChain<S>&, int);                       \
  template Giet<S> renormalized_map<S>(const Giet<S>&, int, Acceleration,                    \
                                       const AccelerationOptions&);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
