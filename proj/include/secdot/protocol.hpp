#pragma once

// Message-driven runtimes for input-parties and the function-party, shared
// by the in-process and multi-process runs.
//
// Every party: HELLO [n] to the FP and to each peer, SELF_GRAM to the FP,
// then its pairs in round order, then DONE to the FP, then waits for the
// FP's DONE. Sends never block, so each side of a pair sends before it
// receives.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secdot/cost.hpp"
#include "secdot/escaped.hpp"
#include "secdot/regen.hpp"
#include "secdot/transport.hpp"

namespace secdot {

inline Frame make_frame(MessageKind kind, std::uint16_t from, std::uint16_t to,
                        std::vector<WireBlock> blocks = {}) {
  Frame f;
  f.kind = kind;
  f.sender = from;
  f.receiver = to;
  f.blocks = std::move(blocks);
  return f;
}

namespace detail {

inline std::string pair_name(std::uint16_t a, std::uint16_t b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

// Rethrows with the party, phase and pair prepended.
template <class Fn>
void in_context(const std::string& context, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), context + ": " + e.what());
  }
}

inline const WireBlock& block_at(const Frame& f, std::size_t i) {
  if (f.blocks.size() <= i) {
    fail(ErrorKind::kProtocol, to_string(f.kind) + " from party " + std::to_string(f.sender) +
                                   " has " + std::to_string(f.blocks.size()) + " blocks");
  }
  return f.blocks[i];
}

template <class T>
Matrix<T> matrix_at(const Frame& f, std::size_t i, std::size_t rows, std::size_t cols) {
  const WireBlock& b = block_at(f, i);
  if (b.rows != rows || b.cols != cols) {
    fail(ErrorKind::kProtocol, to_string(f.kind) + " from party " + std::to_string(f.sender) +
                                   ": block " + std::to_string(i) + " is " +
                                   std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                                   ", expected " + std::to_string(rows) + "x" +
                                   std::to_string(cols));
  }
  return from_block<T>(b);
}

inline std::uint64_t scalar_word(const Frame& f, std::size_t i) {
  const WireBlock& b = block_at(f, i);
  if (b.rows != 1 || b.cols != 1) {
    fail(ErrorKind::kProtocol, to_string(f.kind) + " from party " + std::to_string(f.sender) +
                                   ": expected a 1x1 block");
  }
  return b.words[0];
}

}  // namespace detail

// Party side. `peers` maps peer id to the link with that peer.
template <class T>
void run_party(Protocol protocol, const PartyState<T>& state, int parties,
               std::uint64_t run_seed, PartyLink& fp, std::map<std::uint16_t, PartyLink>& peers) {
  const std::uint16_t me = state.party_id;
  const std::size_t f = state.data.rows();
  const std::string who = "party " + std::to_string(me);
  std::map<std::uint16_t, std::size_t> peer_n;

  detail::in_context(who + ", phase hello", [&] {
    const WireBlock hello = scalar_block(state.data.cols());
    fp.send(make_frame(MessageKind::kHello, me, kFunctionPartyId, {hello}));
    for (auto& [id, link] : peers) link.send(make_frame(MessageKind::kHello, me, id, {hello}));
    for (auto& [id, link] : peers) {
      Frame h = link.recv_expect(MessageKind::kHello);
      std::uint64_t n = detail::scalar_word(h, 0);
      if (n == 0) fail(ErrorKind::kProtocol, "party " + std::to_string(id) + " has no samples");
      peer_n[id] = n;
    }
    fp.send(make_frame(MessageKind::kSelfGram, me, kFunctionPartyId,
                       {to_block(gram_t(state.data, state.data))}));
  });

  const ReScheme scheme = protocol == Protocol::kRe ? regen(f) : ReScheme{};
  bool alpha_sent = false;

  for (const auto& round : schedule_rounds(parties)) {
    for (const auto& [a, b] : round) {
      if (a != me && b != me) continue;
      const bool alice = a == me;
      const std::uint16_t peer = alice ? b : a;
      PartyLink& link = peers.at(peer);
      const std::size_t n_peer = peer_n.at(peer);
      detail::in_context(who + ", phase pair " + detail::pair_name(a, b), [&] {
        if (protocol == Protocol::kEscaped) {
          if (alice) {
            AliceMessage<T> am = alice_round1(state);
            link.send(make_frame(MessageKind::kMaskedData, me, peer, {to_block(am.masked_data)}));
            link.send(make_frame(MessageKind::kMaskedMask, me, peer, {to_block(am.masked_mask)}));
            Frame yb = link.recv_expect(MessageKind::kMaskedData);
            Matrix<T> a1 = alice_compute(state, detail::matrix_at<T>(yb, 0, f, n_peer));
            if (!alpha_sent) {
              fp.send(make_frame(MessageKind::kAlpha, me, kFunctionPartyId,
                                 {scalar_block(ScalarTraits<T>::to_wire(state.mask_scalar))}));
              alpha_sent = true;
            }
            fp.send(make_frame(MessageKind::kPairResult, me, kFunctionPartyId,
                               {scalar_block(peer), to_block(a1)}));
          } else {
            link.send(make_frame(MessageKind::kMaskedData, me, peer,
                                 {to_block(bob_round1(state))}));
            Frame xa = link.recv_expect(MessageKind::kMaskedData);
            Frame aa = link.recv_expect(MessageKind::kMaskedMask);
            auto [b1, b2] = bob_compute(state, detail::matrix_at<T>(xa, 0, f, n_peer),
                                        detail::matrix_at<T>(aa, 0, f, n_peer));
            fp.send(make_frame(MessageKind::kPairResult, me, kFunctionPartyId,
                               {scalar_block(peer), to_block(b1), to_block(b2)}));
          }
          return;
        }
        // Randomized encoding, one scheme instance per sample pair.
        const std::size_t n_me = state.data.cols();
        if (alice) {
          Matrix<T> randoms(n_me * n_peer, 3 * f);
          Matrix<T> comps(n_me * n_peer, 3 * f);
          for (std::size_t p = 0; p < n_me; ++p) {
            const std::vector<T> x = state.data.col(p);
            for (std::size_t q = 0; q < n_peer; ++q) {
              const std::size_t row = p * n_peer + q;
              const std::vector<T> r =
                  re_sample_randoms<T>(scheme, re_pair_seed(run_seed, a, b, p, q));
              auto xc = re_encode_x<T>(x, scheme, r);
              auto br = re_bob_randoms<T>(scheme, r);
              auto off = re_offline<T>(scheme, r);
              for (std::size_t k = 0; k < f; ++k) {
                randoms(row, 3 * k) = br[k].ra;
                randoms(row, 3 * k + 1) = br[k].rb;
                randoms(row, 3 * k + 2) = br[k].rd;
                comps(row, 3 * k) = xc[k].c1;
                comps(row, 3 * k + 1) = xc[k].c2;
                comps(row, 3 * k + 2) = off[k];
              }
            }
          }
          link.send(make_frame(MessageKind::kReRandoms, me, peer, {to_block(randoms)}));
          fp.send(make_frame(MessageKind::kReComponents, me, kFunctionPartyId,
                             {scalar_block(peer), to_block(comps)}));
        } else {
          Frame rf = link.recv_expect(MessageKind::kReRandoms);
          Matrix<T> randoms = detail::matrix_at<T>(rf, 0, n_peer * n_me, 3 * f);
          Matrix<T> comps(n_peer * n_me, 2 * f);
          std::vector<BobLeafRandoms<T>> subset(f);
          for (std::size_t p = 0; p < n_peer; ++p) {
            for (std::size_t q = 0; q < n_me; ++q) {
              const std::size_t row = p * n_me + q;
              for (std::size_t k = 0; k < f; ++k) {
                subset[k] = {randoms(row, 3 * k), randoms(row, 3 * k + 1),
                             randoms(row, 3 * k + 2)};
              }
              auto yc = re_encode_y<T>(state.data.col(q), scheme, subset);
              for (std::size_t k = 0; k < f; ++k) {
                comps(row, 2 * k) = yc[k].c3;
                comps(row, 2 * k + 1) = yc[k].c4;
              }
            }
          }
          fp.send(make_frame(MessageKind::kReComponents, me, kFunctionPartyId,
                             {scalar_block(peer), to_block(comps)}));
        }
      });
    }
  }

  detail::in_context(who + ", phase done", [&] {
    fp.send(make_frame(MessageKind::kDone, me, kFunctionPartyId));
    fp.recv_expect(MessageKind::kDone);
  });
}

// What the function-party received from one input-party.
struct FpInbox {
  std::uint16_t party_id = 0;
  std::size_t samples = 0;
  std::optional<Frame> self_gram;
  std::optional<std::uint64_t> alpha;
  std::map<std::uint16_t, Frame> pair_frames;  // keyed by peer id
  bool done = false;
};

// Files one frame into `box`; frames must arrive in the protocol's order.
inline void fp_ingest(FpInbox& box, const Frame& f) {
  const std::string from = "party " + std::to_string(box.party_id);
  if (f.sender != box.party_id || f.receiver != kFunctionPartyId) {
    fail(ErrorKind::kProtocol, from + ": frame addressed " + std::to_string(f.sender) + "->" +
                                   std::to_string(f.receiver));
  }
  if (box.done) fail(ErrorKind::kProtocol, from + ": " + to_string(f.kind) + " after DONE");
  if (box.samples == 0 && f.kind != MessageKind::kHello) {
    fail(ErrorKind::kProtocol, from + ": expected HELLO, got " + to_string(f.kind));
  }
  switch (f.kind) {
    case MessageKind::kHello: {
      if (box.samples != 0) fail(ErrorKind::kProtocol, from + ": repeated HELLO");
      std::uint64_t n = detail::scalar_word(f, 0);
      if (n == 0) fail(ErrorKind::kProtocol, from + ": HELLO announces zero samples");
      box.samples = n;
      break;
    }
    case MessageKind::kSelfGram:
      if (box.self_gram) fail(ErrorKind::kProtocol, from + ": repeated SELF_GRAM");
      box.self_gram = f;
      break;
    case MessageKind::kAlpha:
      if (box.alpha) fail(ErrorKind::kProtocol, from + ": repeated ALPHA");
      box.alpha = detail::scalar_word(f, 0);
      break;
    case MessageKind::kPairResult:
    case MessageKind::kReComponents: {
      const auto peer = static_cast<std::uint16_t>(detail::scalar_word(f, 0));
      if (!box.pair_frames.emplace(peer, f).second) {
        fail(ErrorKind::kProtocol, from + ": repeated result for peer " + std::to_string(peer));
      }
      break;
    }
    case MessageKind::kDone:
      box.done = true;
      break;
    default:
      fail(ErrorKind::kProtocol, from + ": unexpected " + to_string(f.kind));
  }
}

namespace detail {
inline const Frame& pair_frame(const FpInbox& box, std::uint16_t peer, std::uint16_t a,
                               std::uint16_t b) {
  auto it = box.pair_frames.find(peer);
  if (it == box.pair_frames.end()) {
    fail(ErrorKind::kProtocolIncomplete, "pair " + pair_name(a, b) + ": party " +
                                             std::to_string(box.party_id) +
                                             " sent no result");
  }
  return it->second;
}
}  // namespace detail

template <class T>
std::vector<Matrix<T>> fp_self_blocks(const std::vector<FpInbox>& boxes) {
  std::vector<Matrix<T>> out;
  for (const auto& box : boxes) {
    if (!box.self_gram) {
      fail(ErrorKind::kProtocolIncomplete, "party " + std::to_string(box.party_id) +
                                               " sent no self gram");
    }
    out.push_back(detail::matrix_at<T>(*box.self_gram, 0, box.samples, box.samples));
  }
  return out;
}

template <class T>
PairResult<T> fp_pair_result(const std::vector<FpInbox>& boxes, std::uint16_t a,
                             std::uint16_t b) {
  const FpInbox& ab = boxes.at(a - 1);
  const FpInbox& bb = boxes.at(b - 1);
  const Frame& fa = detail::pair_frame(ab, b, a, b);
  const Frame& fb = detail::pair_frame(bb, a, a, b);
  if (!ab.alpha) {
    fail(ErrorKind::kProtocolIncomplete, "pair " + detail::pair_name(a, b) + ": party " +
                                             std::to_string(a) + " sent no mask scalar");
  }
  PairResult<T> pr;
  pr.alice_id = a;
  pr.bob_id = b;
  pr.a1 = detail::matrix_at<T>(fa, 1, ab.samples, bb.samples);
  pr.b1 = detail::matrix_at<T>(fb, 1, ab.samples, bb.samples);
  pr.b2 = detail::matrix_at<T>(fb, 2, ab.samples, bb.samples);
  pr.alpha = ScalarTraits<T>::from_wire(*ab.alpha);
  return pr;
}

template <class T>
Matrix<T> fp_re_block(const std::vector<FpInbox>& boxes, std::uint16_t a, std::uint16_t b,
                      std::size_t features) {
  const FpInbox& ab = boxes.at(a - 1);
  const FpInbox& bb = boxes.at(b - 1);
  const std::size_t rows = ab.samples * bb.samples;
  Matrix<T> xc = detail::matrix_at<T>(detail::pair_frame(ab, b, a, b), 1, rows, 3 * features);
  Matrix<T> yc = detail::matrix_at<T>(detail::pair_frame(bb, a, a, b), 1, rows, 2 * features);
  Matrix<T> out(ab.samples, bb.samples);
  for (std::size_t p = 0; p < ab.samples; ++p) {
    for (std::size_t q = 0; q < bb.samples; ++q) {
      const std::size_t row = p * bb.samples + q;
      T acc = ScalarTraits<T>::zero();
      for (std::size_t k = 0; k < features; ++k) {
        acc += xc(row, 3 * k) * yc(row, 2 * k) + xc(row, 3 * k + 1) + yc(row, 2 * k + 1) +
               xc(row, 3 * k + 2);
      }
      out(p, q) = acc;
    }
  }
  return out;
}

template <class T>
GramAssembly<T> fp_assemble(Protocol protocol, const std::vector<FpInbox>& boxes,
                            std::size_t features) {
  const int m = static_cast<int>(boxes.size());
  for (const auto& box : boxes) {
    if (!box.done) {
      fail(ErrorKind::kProtocolIncomplete, "party " + std::to_string(box.party_id) +
                                               " did not finish");
    }
  }
  std::map<PartyPair, Matrix<T>> cross;
  for (const auto& [a, b] : pair_schedule(m)) {
    detail::in_context("function-party, pair " + detail::pair_name(a, b), [&] {
      cross[{a, b}] = protocol == Protocol::kEscaped
                          ? fp_combine(fp_pair_result<T>(boxes, a, b))
                          : fp_re_block<T>(boxes, a, b, features);
    });
  }
  return assemble_blocks(fp_self_blocks<T>(boxes), std::move(cross));
}

// Function-party side: drains each party's link until DONE, in id order,
// then releases every party with DONE. Links are indexed by party id - 1.
inline std::vector<FpInbox> run_function_party(std::vector<PartyLink*> links) {
  std::vector<FpInbox> boxes(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    boxes[i].party_id = static_cast<std::uint16_t>(i + 1);
    detail::in_context("function-party, party " + std::to_string(i + 1), [&] {
      while (!boxes[i].done) fp_ingest(boxes[i], links[i]->recv());
    });
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    links[i]->send(make_frame(MessageKind::kDone, kFunctionPartyId,
                              static_cast<std::uint16_t>(i + 1)));
  }
  return boxes;
}

// Rebuilds the function-party's inboxes from a transcript.
inline std::vector<FpInbox> fp_inboxes_from_transcript(const Transcript& t, int parties) {
  std::vector<FpInbox> boxes(parties);
  for (int i = 0; i < parties; ++i) boxes[i].party_id = static_cast<std::uint16_t>(i + 1);
  for (const auto& rec : t.frames()) {
    if (rec.receiver != kFunctionPartyId) continue;
    if (rec.sender == 0 || rec.sender > parties) {
      fail(ErrorKind::kProtocol, "transcript frame from unknown party " +
                                     std::to_string(rec.sender));
    }
    fp_ingest(boxes[rec.sender - 1], frame_decode(rec.frame));
  }
  return boxes;
}

// Everything the function-party can derive from the ESCAPED messages it
// received: a_i^T a_j = alpha_i^-1 B2, a_i^T X_j = A1 + a_i^T a_j.
template <class T>
LeakageView<T> leakage_view(const Transcript& t, int parties) {
  std::vector<FpInbox> boxes = fp_inboxes_from_transcript(t, parties);
  LeakageView<T> view;
  std::vector<Matrix<T>> self = fp_self_blocks<T>(boxes);
  for (int i = 0; i < parties; ++i) view.self_grams[static_cast<std::uint16_t>(i + 1)] = self[i];
  for (const auto& box : boxes)
    if (box.alpha) view.alphas[box.party_id] = ScalarTraits<T>::from_wire(*box.alpha);
  for (const auto& [a, b] : pair_schedule(parties)) {
    PairResult<T> pr = fp_pair_result<T>(boxes, a, b);
    Matrix<T> mm = mat_scale(ScalarTraits<T>::inv(pr.alpha), pr.b2);
    view.mask_data[{a, b}] = mat_add(pr.a1, mm);
    view.mask_mask[{a, b}] = std::move(mm);
    view.data_data[{a, b}] = fp_combine(pr);
  }
  return view;
}

}  // namespace secdot
