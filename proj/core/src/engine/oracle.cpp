#include "mcsd/engine/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mcsd/error.hpp"
#include "mcsd/model/sampling.hpp"
#include "mcsd/tree/token_tree.hpp"

namespace mcsd {

namespace {

constexpr double kEmptyMass = 1e-12;

std::vector<double> residual_of(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> r(p.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    r[i] = std::max(0.0, p[i] - q[i]);
    mass += r[i];
  }
  if (mass <= kEmptyMass) return p;
  for (double& v : r) v /= mass;
  return r;
}

std::optional<std::vector<double>> drop(const std::vector<double>& q, TokenId x) {
  std::vector<double> r = q;
  r[static_cast<std::size_t>(x)] = 0.0;
  double mass = 0.0;
  for (double v : r) mass += v;
  if (mass <= 0.0) return std::nullopt;
  for (double& v : r) v /= mass;
  return r;
}

std::vector<double> as_vector(const Distribution& d) { return {d.probs().begin(), d.probs().end()}; }

struct Walk {
  std::vector<int> path;
  std::vector<double> final_dist;
  double prob;
};

class Enumerator {
 public:
  Enumerator(const Method& method, const OracleSetup& setup, TokenSpan prefix,
             const std::optional<Distribution>& pending)
      : method_(method), setup_(setup), prefix_(prefix.begin(), prefix.end()) {
    if (setup.draft.vocab_size() != setup.target.vocab_size()) throw ConfigError("draft/target vocabulary mismatch");
    vocab_ = setup.target.vocab_size();
    if (vocab_ > kOracleMaxVocab) {
      throw IntractableError(fmt::format("oracle handles vocabularies up to {}, got {}", kOracleMaxVocab, vocab_));
    }
    if (const auto* sd = std::get_if<BaselineSdMethod>(&method)) {
      tree_ = TreeConfig::expansion(std::vector<int>(static_cast<std::size_t>(std::max(sd->gamma, 1)), 1));
    } else if (const auto* m = std::get_if<McsdMethod>(&method)) {
      tree_ = m->tree;
    } else if (const auto* m = std::get_if<TargetInitMethod>(&method)) {
      tree_ = m->tree;
    } else if (const auto* m = std::get_if<DynamicMethod>(&method)) {
      tree_ = m->tree;
      dynamic_ = m;
    }
    if (tree_) {
      skeleton_ = build_tree_shape(*tree_).tree;
      if (skeleton_.size() > kOracleMaxNodes) {
        throw IntractableError(
            fmt::format("oracle handles trees up to {} nodes, got {}", kOracleMaxNodes, skeleton_.size()));
      }
      target_init_ = tree_->target_initialized();
      if (target_init_ && static_cast<std::size_t>(tree_->target_init_width) > vocab_) {
        throw ConfigError("target_init_width exceeds vocabulary size");
      }
    }
    root_target_ = pending && target_init_ ? as_vector(*pending) : target_dist({});
  }

  std::vector<OracleOutcome> run() {
    if (!tree_) {
      std::vector<OracleOutcome> out;
      for (std::size_t t = 0; t < vocab_; ++t) {
        if (root_target_[t] > 0.0) out.push_back({{static_cast<TokenId>(t)}, std::nullopt, root_target_[t]});
      }
      return out;
    }
    tokens_.assign(skeleton_.size(), kNoToken);
    assign(0, 1.0);
    return std::move(outcomes_);
  }

 private:
  TokenSeq context(int node) const {
    TokenSeq ctx = prefix_;
    if (node >= 0) {
      for (int a : skeleton_.path_to(static_cast<std::size_t>(node)))
        ctx.push_back(tokens_[static_cast<std::size_t>(a)]);
    }
    return ctx;
  }
  std::vector<double> target_dist(const TokenSeq& suffix) {
    TokenSeq ctx = prefix_;
    ctx.insert(ctx.end(), suffix.begin(), suffix.end());
    return as_vector(apply_temperature(setup_.target.next(ctx).logits, setup_.temperature));
  }
  std::vector<double> dist_at(const LanguageModel& model, int node) const {
    return as_vector(apply_temperature(model.next(context(node)).logits, setup_.temperature));
  }

  std::span<const int> siblings_of(int node) const {
    const int parent = skeleton_.node(static_cast<std::size_t>(node)).parent;
    return parent < 0 ? skeleton_.roots()
                      : std::span<const int>(skeleton_.node(static_cast<std::size_t>(parent)).children);
  }

  bool stops_after(int level) const {
    const int first_draft = target_init_ ? 2 : 1;
    if (!dynamic_ || level < first_draft) return false;
    std::vector<DraftFeatures> batch;
    for (std::size_t j = 0; j < skeleton_.size(); ++j) {
      if (skeleton_.node(j).depth != level || tokens_[j] == kNoToken) continue;
      const int parent = skeleton_.node(j).parent;
      const TokenOutput out = setup_.draft.next(context(parent));
      batch.push_back({out.hidden, apply_temperature(out.logits, setup_.temperature)});
    }
    if (batch.empty()) return false;
    return should_stop(*dynamic_->decision, batch, dynamic_->beta);
  }

  void assign(std::size_t i, double prob) {
    if (i == skeleton_.size()) {
      verify(prob);
      return;
    }
    const TreeNode& node = skeleton_.node(i);
    if (i > 0 && skeleton_.node(i - 1).depth < node.depth && stops_after(node.depth - 1)) {
      for (std::size_t j = i; j < skeleton_.size(); ++j) tokens_[j] = kNoToken;
      verify(prob);
      return;
    }
    if (node.parent >= 0 && tokens_[static_cast<std::size_t>(node.parent)] == kNoToken) {
      tokens_[i] = kNoToken;
      assign(i + 1, prob);
      return;
    }
    const bool from_target = target_init_ && node.depth == 1;
    std::vector<double> base = from_target ? root_target_ : dist_at(setup_.draft, node.parent);
    const bool distinct = from_target || setup_.siblings == SiblingSampling::kWithoutReplacement;

    std::optional<std::vector<double>> dist = base;
    std::size_t rank = 0;
    for (int s : siblings_of(static_cast<int>(i))) {
      if (static_cast<std::size_t>(s) == i) break;
      ++rank;
      const TokenId prev = tokens_[static_cast<std::size_t>(s)];
      if (prev == kNoToken) {
        dist.reset();
        break;
      }
      if (distinct && dist) dist = drop(*dist, prev);
    }

    if (from_target && setup_.init == InitSampling::kGreedy) {
      std::vector<TokenId> order;
      for (std::size_t t = 0; t < vocab_; ++t) {
        if (base[t] > 0.0) order.push_back(static_cast<TokenId>(t));
      }
      std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) { return base[a] > base[b]; });
      tokens_[i] = rank < order.size() ? order[rank] : kNoToken;
      assign(i + 1, prob);
      return;
    }
    if (!dist) {
      tokens_[i] = kNoToken;
      assign(i + 1, prob);
      return;
    }
    for (std::size_t t = 0; t < vocab_; ++t) {
      if ((*dist)[t] <= 0.0) continue;
      tokens_[i] = static_cast<TokenId>(t);
      assign(i + 1, prob * (*dist)[t]);
    }
    tokens_[i] = kNoToken;
  }

  std::vector<int> active_children(int node) const {
    const auto kids =
        node < 0 ? skeleton_.roots() : std::span<const int>(skeleton_.node(static_cast<std::size_t>(node)).children);
    std::vector<int> out;
    for (int k : kids) {
      if (tokens_[static_cast<std::size_t>(k)] != kNoToken) out.push_back(k);
    }
    return out;
  }

  std::vector<Walk> walk(int node) const {
    std::vector<double> p = node < 0 ? root_target_ : dist_at(setup_.target, node);
    const std::vector<int> kids = active_children(node);
    if (kids.empty()) return {{{}, p, 1.0}};
    std::vector<Walk> out;
    walk_siblings(kids, 0, p, dist_at(setup_.draft, node), 1.0, out);
    return out;
  }

  void walk_siblings(const std::vector<int>& kids, std::size_t k, const std::vector<double>& p,
                     const std::optional<std::vector<double>>& q, double prob, std::vector<Walk>& out) const {
    if (k == kids.size() || !q) {
      out.push_back({{}, p, prob});
      return;
    }
    const int kid = kids[k];
    const TokenId x = tokens_[static_cast<std::size_t>(kid)];
    const double qx = (*q)[static_cast<std::size_t>(x)];
    const double a = qx > 0.0 ? std::min(1.0, p[static_cast<std::size_t>(x)] / qx) : 0.0;
    if (a > 0.0) {
      for (Walk& w : walk(kid)) {
        w.path.insert(w.path.begin(), kid);
        w.prob *= prob * a;
        out.push_back(std::move(w));
      }
    }
    if (a < 1.0) {
      const std::optional<std::vector<double>> q_next =
          setup_.siblings == SiblingSampling::kWithoutReplacement ? drop(*q, x) : q;
      walk_siblings(kids, k + 1, residual_of(p, *q), q_next, prob * (1.0 - a), out);
    }
  }

  TokenSeq tokens_on(const std::vector<int>& path) const {
    TokenSeq out;
    for (int n : path) out.push_back(tokens_[static_cast<std::size_t>(n)]);
    return out;
  }

  void verify(double prob) {
    if (!target_init_) {
      for (const Walk& w : walk(-1)) {
        TokenSeq emitted = tokens_on(w.path);
        for (std::size_t t = 0; t < vocab_; ++t) {
          if (w.final_dist[t] <= 0.0) continue;
          emitted.push_back(static_cast<TokenId>(t));
          outcomes_.push_back({emitted, std::nullopt, prob * w.prob * w.final_dist[t]});
          emitted.pop_back();
        }
      }
      return;
    }
    std::vector<int> inits = active_children(-1);
    std::vector<std::vector<Walk>> walks;
    for (int r : inits) walks.push_back(walk(r));
    std::vector<std::size_t> pick(inits.size(), 0);
    while (true) {
      double p = prob;
      std::size_t best = 0;
      for (std::size_t r = 0; r < inits.size(); ++r) {
        p *= walks[r][pick[r]].prob;
        if (r == 0) continue;
        const auto len = walks[r][pick[r]].path.size();
        const auto best_len = walks[best][pick[best]].path.size();
        const TokenId tok = tokens_[static_cast<std::size_t>(inits[r])];
        const TokenId best_tok = tokens_[static_cast<std::size_t>(inits[best])];
        bool better;
        if (len != best_len) {
          better = len > best_len;
        } else if (root_target_[tok] != root_target_[best_tok]) {
          better = root_target_[tok] > root_target_[best_tok];
        } else {
          better = tok < best_tok;
        }
        if (better) best = r;
      }
      const Walk& w = walks[best][pick[best]];
      TokenSeq emitted{tokens_[static_cast<std::size_t>(inits[best])]};
      const TokenSeq rest = tokens_on(w.path);
      emitted.insert(emitted.end(), rest.begin(), rest.end());
      outcomes_.push_back({emitted, Distribution(w.final_dist), p});

      std::size_t r = 0;
      while (r < pick.size() && ++pick[r] == walks[r].size()) pick[r++] = 0;
      if (r == pick.size()) break;
    }
  }

  const Method& method_;
  const OracleSetup& setup_;
  TokenSeq prefix_;
  std::size_t vocab_ = 0;
  std::optional<TreeConfig> tree_;
  const DynamicMethod* dynamic_ = nullptr;
  TokenTree skeleton_;
  bool target_init_ = false;
  std::vector<double> root_target_;
  TokenSeq tokens_;
  std::vector<OracleOutcome> outcomes_;
};

void chain(const Method& method, const OracleSetup& setup, TokenSeq& prefix, const std::optional<Distribution>& pending,
           TokenSeq& acc, double prob, std::size_t length, SequenceDistribution& out) {
  // Outcomes sharing emissions and pending root continue identically.
  std::map<std::pair<TokenSeq, std::vector<double>>, double> merged;
  for (const OracleOutcome& o : exact_step_outcomes(method, setup, prefix, pending)) {
    std::vector<double> next;
    if (o.pending) next = as_vector(*o.pending);
    merged[{o.emitted, std::move(next)}] += o.prob;
  }
  for (const auto& [key, p] : merged) {
    const auto& [emitted, next] = key;
    const std::size_t before = acc.size();
    const std::size_t take = std::min(emitted.size(), length - before);
    acc.insert(acc.end(), emitted.begin(), emitted.begin() + static_cast<std::ptrdiff_t>(take));
    if (acc.size() == length) {
      out[acc] += prob * p;
    } else {
      prefix.insert(prefix.end(), emitted.begin(), emitted.end());
      const std::optional<Distribution> carry =
          next.empty() ? std::nullopt : std::optional<Distribution>(Distribution(next));
      chain(method, setup, prefix, carry, acc, prob * p, length, out);
      prefix.resize(prefix.size() - emitted.size());
    }
    acc.resize(before);
  }
}

}  // namespace

std::vector<OracleOutcome> exact_step_outcomes(const Method& method, const OracleSetup& setup, TokenSpan prefix,
                                               const std::optional<Distribution>& pending) {
  validate_method(method);
  return Enumerator(method, setup, prefix, pending).run();
}

Distribution exact_output_distribution(const Method& method, const OracleSetup& setup, TokenSpan prefix) {
  std::vector<double> first(setup.target.vocab_size(), 0.0);
  for (const OracleOutcome& o : exact_step_outcomes(method, setup, prefix)) {
    first[static_cast<std::size_t>(o.emitted.front())] += o.prob;
  }
  return Distribution::normalized(std::move(first));
}

SequenceDistribution exact_output_joint(const Method& method, const OracleSetup& setup, TokenSpan prefix,
                                        std::size_t length) {
  if (length == 0) throw ArgumentError("joint length must be positive");
  SequenceDistribution out;
  TokenSeq ctx(prefix.begin(), prefix.end());
  TokenSeq acc;
  chain(method, setup, ctx, std::nullopt, acc, 1.0, length, out);
  return out;
}

SequenceDistribution target_joint(const LanguageModel& target, double temperature, TokenSpan prefix,
                                  std::size_t length) {
  SequenceDistribution out{{TokenSeq{}, 1.0}};
  for (std::size_t step = 0; step < length; ++step) {
    SequenceDistribution next;
    for (const auto& [seq, prob] : out) {
      TokenSeq ctx(prefix.begin(), prefix.end());
      ctx.insert(ctx.end(), seq.begin(), seq.end());
      const Distribution p = apply_temperature(target.next(ctx).logits, temperature);
      for (std::size_t t = 0; t < p.size(); ++t) {
        if (p.probs()[t] <= 0.0) continue;
        TokenSeq s = seq;
        s.push_back(static_cast<TokenId>(t));
        next[s] += prob * p.probs()[t];
      }
    }
    out = std::move(next);
  }
  return out;
}

double total_variation(const SequenceDistribution& a, const SequenceDistribution& b) {
  double sum = 0.0;
  for (const auto& [seq, pa] : a) {
    const auto it = b.find(seq);
    sum += std::abs(pa - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [seq, pb] : b) {
    if (!a.contains(seq)) sum += pb;
  }
  return 0.5 * sum;
}

}  // namespace mcsd
