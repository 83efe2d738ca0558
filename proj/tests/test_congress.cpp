#include <doctest.h>

#include <algorithm>

#include "datapact/congress.hpp"
#include "harness.hpp"

using namespace datapact;
using datapact::test::World;
using datapact::test::WorldConfig;

namespace {

struct BreachFixture {
  World world;
  std::shared_ptr<DataShareContract> contract;

  BreachFixture() {
    contract = world.create_contract();
    contract->provider_deposit(world.provider.address, Wei{50000});
    contract->deliver_link(world.provider.address, world.dummy_bundle());
  }

  std::shared_ptr<VoteContract> accuse(const test::Party& accuser, const std::string& why) {
    return contract->raise_breach(accuser.address, why, std::nullopt, world.congress);
  }

  void cast_all(VoteContract& vote, std::initializer_list<Ballot> ballots) {
    std::size_t i = 0;
    for (Ballot b : ballots) {
      vote.cast_vote(world.arbiters[i++].address, b, world.ledger.now());
    }
  }

  const Decision& close_vote(VoteContract& vote) {
    world.ledger.advance_time(world.config.voting_time);
    return vote.tally(world.ledger.now(), world.sealed.terms.quorum, world.sealed.terms.voting_margin);
  }
};

}  // namespace

TEST_CASE("congress deployment gas is exactly linear") {
  CHECK(congress_deploy_gas(1) == 2181014);
  CHECK(congress_deploy_gas(10) == 2183669);
  CHECK(congress_deploy_gas(4) == 2181899);
  for (std::size_t v = 1; v < 20; ++v) {
    CHECK(congress_deploy_gas(v + 1) - congress_deploy_gas(v) == 295);
  }
  CHECK_FAILS_WITH(congress_deploy_gas(0), ErrorCode::InvalidRange);
}

TEST_CASE("spawn_vote validates the panel and the compensation") {
  BreachFixture fx;
  std::vector<Address> panel;
  for (const auto& a : fx.world.arbiters) panel.push_back(a.address);

  SUBCASE("a valid spawn opens a deadline-bounded vote") {
    auto vote = fx.world.congress.spawn_vote(*fx.contract, fx.world.requester.address, panel, 3600,
                                             Wei{100}, "incomplete data");
    CHECK(vote->phase() == VotePhase::Open);
    CHECK(vote->deadline() == fx.world.ledger.now() + 3600);
    LogFilter filter;
    filter.kind = "VOTE_REQUEST";
    CHECK(fx.world.ledger.query_log(filter).size() == panel.size());
  }
  SUBCASE("an empty panel is rejected") {
    CHECK_FAILS_WITH(
        fx.world.congress.spawn_vote(*fx.contract, fx.world.requester.address, {}, 3600, Wei{0}, ""),
        ErrorCode::EmptyPanel);
  }
  SUBCASE("a party on the panel is a conflict") {
    panel.push_back(fx.world.provider.address);
    CHECK_FAILS_WITH(
        fx.world.congress.spawn_vote(*fx.contract, fx.world.requester.address, panel, 3600, Wei{0}, ""),
        ErrorCode::ConflictedArbiter);
  }
  SUBCASE("a non-party accuser cannot spawn a vote") {
    CHECK_FAILS_WITH(
        fx.world.congress.spawn_vote(*fx.contract, fx.world.arbiters[0].address, panel, 3600, Wei{0}, ""),
        ErrorCode::NotParty);
  }
  SUBCASE("compensation above the remaining escrow is rejected") {
    Wei escrow = fx.world.ledger.balance_of(fx.contract->address());
    CHECK_FAILS_WITH(fx.world.congress.spawn_vote(*fx.contract, fx.world.requester.address, panel, 3600,
                                                  escrow + Wei{1}, ""),
                     ErrorCode::CompensationExceedsEscrow);
  }
}

TEST_CASE("cast_vote enforces panel membership, single votes, and the deadline") {
  BreachFixture fx;
  auto vote = fx.accuse(fx.world.requester, "the data is incorrect");

  SUBCASE("a listed arbiter votes before the deadline") {
    vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now());
    LogFilter filter;
    filter.kind = "BALLOT";
    auto ballots = fx.world.ledger.query_log(filter);
    REQUIRE(ballots.size() == 1);
    CHECK(ballots[0].payload.at("ballot") == "yes");
  }
  SUBCASE("voting twice is rejected") {
    vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now());
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.arbiters[0].address, Ballot::No, fx.world.ledger.now()),
                     ErrorCode::AlreadyVoted);
  }
  SUBCASE("the deadline boundary is closed") {
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, vote->deadline()),
                     ErrorCode::VotingClosed);
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, vote->deadline() + 1),
                     ErrorCode::VotingClosed);
  }
  SUBCASE("outsiders cannot vote") {
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.requester.address, Ballot::Yes, fx.world.ledger.now()),
                     ErrorCode::NotArbiter);
  }
  SUBCASE("arbiters pay the call gas") {
    Wei before = fx.world.ledger.balance_of(fx.world.arbiters[0].address);
    vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now());
    CHECK(fx.world.ledger.balance_of(fx.world.arbiters[0].address) == before - Wei{30000});
  }
}

TEST_CASE("tally applies the quorum and the strict margin") {
  BreachFixture fx;
  auto vote = fx.accuse(fx.world.requester, "the data is incorrect");

  SUBCASE("[Y,Y,N] with quorum 3, margin 0.5 confirms the breach") {
    fx.cast_all(*vote, {Ballot::Yes, Ballot::Yes, Ballot::No});
    const Decision& d = fx.close_vote(*vote);
    CHECK(d.breach_confirmed);
    CHECK(d.yes_count == 2);
    CHECK(d.no_count == 1);
    CHECK(d.cast_count == 3);
    CHECK(*d.violator == fx.world.provider.address);  // the accuser's counterparty
  }
  SUBCASE("[Y] with quorum 2 fails quorum") {
    vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now());
    fx.world.ledger.advance_time(fx.world.config.voting_time);
    const Decision& d = vote->tally(fx.world.ledger.now(), 2, 0.5);
    CHECK_FALSE(d.breach_confirmed);
  }
  SUBCASE("[Y,N] with quorum 2, margin 0.5 is a tie and favors the accused") {
    fx.cast_all(*vote, {Ballot::Yes, Ballot::No});
    fx.world.ledger.advance_time(fx.world.config.voting_time);
    const Decision& d = vote->tally(fx.world.ledger.now(), 2, 0.5);
    CHECK_FALSE(d.breach_confirmed);  // 1 > 1.0 is false
  }
  SUBCASE("tally before the deadline is rejected") {
    CHECK_FAILS_WITH(vote->tally(fx.world.ledger.now(), 3, 0.5), ErrorCode::DeadlineNotReached);
  }
  SUBCASE("a second tally is a wrong phase") {
    fx.close_vote(*vote);
    CHECK_FAILS_WITH(vote->tally(fx.world.ledger.now(), 3, 0.5), ErrorCode::WrongPhase);
  }
  SUBCASE("ballots after tally are rejected") {
    fx.close_vote(*vote);
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.arbiters[2].address, Ballot::Yes, fx.world.ledger.now()),
                     ErrorCode::WrongPhase);
  }
}

TEST_CASE("tally matches a brute-force counting oracle") {
  // All ballot assignments (yes/no/absent) for panels of 1..3 arbiters, all
  // quorums, margins {0.25, 0.5, 0.75}, against integer arithmetic: confirmed
  // iff cast >= quorum and 4*yes > 4*margin*cast.
  for (std::size_t panel_size = 1; panel_size <= 3; ++panel_size) {
    std::size_t assignments = 1;
    for (std::size_t i = 0; i < panel_size; ++i) assignments *= 3;
    for (std::size_t code = 0; code < assignments; ++code) {
      for (std::uint32_t quorum = 1; quorum <= panel_size; ++quorum) {
        for (int margin_quarters : {1, 2, 3}) {
          WorldConfig cfg;
          cfg.arbiter_count = panel_size;
          cfg.quorum = quorum;
          cfg.voting_margin = margin_quarters / 4.0;
          World world(cfg);
          auto contract = world.create_contract();
          auto vote = contract->raise_breach(world.requester.address, "oracle", std::nullopt,
                                             world.congress);

          std::uint32_t yes = 0, cast = 0;
          std::size_t c = code;
          for (std::size_t i = 0; i < panel_size; ++i, c /= 3) {
            switch (c % 3) {
              case 0: break;  // absent
              case 1:
                vote->cast_vote(world.arbiters[i].address, Ballot::Yes, world.ledger.now());
                ++yes;
                ++cast;
                break;
              case 2:
                vote->cast_vote(world.arbiters[i].address, Ballot::No, world.ledger.now());
                ++cast;
                break;
            }
          }
          world.ledger.advance_time(cfg.voting_time);
          const Decision& d = vote->tally(world.ledger.now(), quorum, cfg.voting_margin);
          bool oracle = cast >= quorum && 4 * yes > static_cast<std::uint32_t>(margin_quarters) * cast;
          CHECK(d.breach_confirmed == oracle);
          CHECK(d.cast_count == cast);
          CHECK(d.yes_count == yes);
        }
      }
    }
  }
}

TEST_CASE("execute_decision transfers both deposits to the victim") {
  BreachFixture fx;

  SUBCASE("a confirmed breach pays the victim and zeroes the breacher's escrow") {
    auto vote = fx.accuse(fx.world.requester, "the data is incorrect");
    fx.cast_all(*vote, {Ballot::Yes, Ballot::Yes, Ballot::No});
    fx.close_vote(*vote);

    Wei victim_before = fx.world.ledger.balance_of(fx.world.requester.address);
    Wei supply = fx.world.ledger.total_balance();
    vote->execute_decision();

    CHECK(fx.world.ledger.balance_of(fx.world.requester.address) == victim_before + Wei{100000});
    CHECK(fx.contract->escrow().provider_deposit == Wei{0});
    CHECK(fx.contract->escrow().requester_deposit == Wei{0});
    CHECK(fx.world.ledger.total_balance() == supply);
    CHECK_FALSE(fx.contract->active_vote().has_value());
    CHECK(fx.contract->breach_history().back().decision == "breach_confirmed");

    // the vote contract destroyed itself
    CHECK_FALSE(fx.world.ledger.contract_live(vote->address()));
    CHECK(fx.world.ledger.balance_of(vote->address()) == Wei{0});
    CHECK_FAILS_WITH(vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now()),
                     ErrorCode::WrongPhase);
    CHECK_FAILS_WITH(vote->execute_decision(), ErrorCode::AlreadyExecuted);
  }
  SUBCASE("a false accusation moves nothing; the accuser is out the spawn gas") {
    Wei accuser_before = fx.world.ledger.balance_of(fx.world.requester.address);
    auto vote = fx.accuse(fx.world.requester, "unfounded");
    fx.cast_all(*vote, {Ballot::No, Ballot::No, Ballot::Yes});
    fx.close_vote(*vote);
    EscrowView escrow_before = fx.contract->escrow();
    vote->execute_decision();

    CHECK(fx.contract->escrow().requester_deposit == escrow_before.requester_deposit);
    CHECK(fx.contract->escrow().provider_deposit == escrow_before.provider_deposit);
    CHECK(fx.world.ledger.balance_of(fx.world.requester.address) == accuser_before - Wei{2181604});
    CHECK(fx.contract->breach_history().back().decision == "no_breach");
  }
  SUBCASE("execution requires a tally first") {
    auto vote = fx.accuse(fx.world.requester, "premature");
    CHECK_FAILS_WITH(vote->execute_decision(), ErrorCode::WrongPhase);
  }
}

TEST_CASE("compensation caps the immediate payout and the breacher still forfeits") {
  BreachFixture fx;
  auto vote = fx.contract->raise_breach(fx.world.requester.address, "partial severity", Wei{40000},
                                        fx.world.congress);
  fx.cast_all(*vote, {Ballot::Yes, Ballot::Yes, Ballot::Yes});
  fx.close_vote(*vote);

  Wei victim_before = fx.world.ledger.balance_of(fx.world.requester.address);
  vote->execute_decision();

  // immediate payout capped at 40000, drawn from the victim's own deposit first
  CHECK(fx.world.ledger.balance_of(fx.world.requester.address) == victim_before + Wei{40000});
  CHECK(fx.contract->escrow().requester_deposit == Wei{60000});  // 10000 own + 50000 forfeited
  CHECK(fx.contract->escrow().provider_deposit == Wei{0});

  // at close the victim collects the re-attributed forfeit; the breacher gets nothing
  Wei provider_before = fx.world.ledger.balance_of(fx.world.provider.address);
  fx.world.ledger.advance_time(fx.world.config.contract_lifetime);
  fx.contract->expire(fx.world.ledger.now());
  CHECK(fx.world.ledger.balance_of(fx.world.provider.address) == provider_before);
}

TEST_CASE("sequential breaches re-spawn votes capped by the remaining escrow") {
  BreachFixture fx;
  auto first = fx.accuse(fx.world.requester, "first breach");
  fx.cast_all(*first, {Ballot::Yes, Ballot::Yes, Ballot::Yes});
  fx.close_vote(*first);
  first->execute_decision();
  CHECK(fx.contract->breach_history().size() == 1);

  // both deposit sub-accounts are now empty; a second confirmed breach pays zero
  auto second = fx.accuse(fx.world.provider, "retaliation");
  CHECK(fx.contract->breach_history().size() == 2);
  fx.cast_all(*second, {Ballot::Yes, Ballot::Yes, Ballot::Yes});
  fx.world.ledger.advance_time(fx.world.config.voting_time);
  second->tally(fx.world.ledger.now(), fx.world.sealed.terms.quorum, fx.world.sealed.terms.voting_margin);

  Wei provider_before = fx.world.ledger.balance_of(fx.world.provider.address);
  second->execute_decision();
  CHECK(fx.world.ledger.balance_of(fx.world.provider.address) == provider_before);
  CHECK(fx.contract->breach_history().back().decision == "breach_confirmed");
}

TEST_CASE("the vote snapshot and decision export as JSON") {
  BreachFixture fx;
  auto vote = fx.accuse(fx.world.requester, "json probe");
  vote->cast_vote(fx.world.arbiters[0].address, Ballot::Yes, fx.world.ledger.now());
  const Decision& d = fx.close_vote(*vote);

  nlohmann::ordered_json j = vote->snapshot();
  CHECK(j.at("address") == vote->address().to_hex());
  CHECK(j.at("accuser") == fx.world.requester.address.to_hex());
  CHECK(j.at("phase") == "tallied");
  REQUIRE(j.at("ballots").size() == 1);
  CHECK(j.at("ballots")[0].at("ballot") == "yes");

  nlohmann::ordered_json dj = d.to_json();
  CHECK(dj.at("breach_confirmed") == false);  // quorum 3 unmet with one ballot
  CHECK(dj.at("yes_count") == 1);
  CHECK(dj.at("cast_count") == 1);
}

TEST_CASE("permuting the panel never changes the decision") {
  for (int permutation = 0; permutation < 6; ++permutation) {
    WorldConfig cfg;
    World world(cfg);
    auto contract = world.create_contract();
    std::vector<Address> panel;
    for (const auto& a : world.arbiters) panel.push_back(a.address);
    std::vector<int> order = {0, 1, 2};
    for (int i = 0; i < permutation; ++i) std::next_permutation(order.begin(), order.end());
    std::vector<Address> shuffled = {panel[order[0]], panel[order[1]], panel[order[2]]};

    auto vote = world.congress.spawn_vote(*contract, world.requester.address, shuffled, 3600, Wei{100000},
                                          "permutation probe");
    // arbiter0 -> Yes, arbiter1 -> Yes, arbiter2 -> No, independent of panel order
    vote->cast_vote(world.arbiters[0].address, Ballot::Yes, world.ledger.now());
    vote->cast_vote(world.arbiters[1].address, Ballot::Yes, world.ledger.now());
    vote->cast_vote(world.arbiters[2].address, Ballot::No, world.ledger.now());
    world.ledger.advance_time(3600);
    const Decision& d = vote->tally(world.ledger.now(), 3, 0.5);
    CHECK(d.breach_confirmed);
    CHECK(d.yes_count == 2);
  }
}

TEST_CASE("flipping a ballot from No to Yes never unconfirms a breach") {
  // monotonicity over all 2^4 ballot patterns on a 4-arbiter panel
  WorldConfig cfg;
  cfg.arbiter_count = 4;
  cfg.quorum = 2;
  for (std::uint32_t pattern = 0; pattern < 16; ++pattern) {
    auto run_pattern = [&](std::uint32_t bits) {
      World world(cfg);
      auto contract = world.create_contract();
      auto vote = contract->raise_breach(world.requester.address, "monotonicity", std::nullopt,
                                         world.congress);
      for (std::size_t i = 0; i < 4; ++i) {
        vote->cast_vote(world.arbiters[i].address, (bits >> i) & 1 ? Ballot::Yes : Ballot::No,
                        world.ledger.now());
      }
      world.ledger.advance_time(cfg.voting_time);
      return vote->tally(world.ledger.now(), cfg.quorum, cfg.voting_margin).breach_confirmed;
    };
    bool base = run_pattern(pattern);
    for (std::uint32_t bit = 0; bit < 4; ++bit) {
      if (pattern & (1u << bit)) continue;
      bool flipped = run_pattern(pattern | (1u << bit));
      if (base) CHECK(flipped);
    }
  }
}
