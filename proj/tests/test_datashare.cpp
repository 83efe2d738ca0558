#include <doctest.h>

#include "datapact/congress.hpp"
#include "datapact/datashare.hpp"
#include "harness.hpp"

using namespace datapact;
using datapact::test::World;
using datapact::test::WorldConfig;

// Fixture numbers (GasPolicy defaults, 3 arbiters):
//   datashare deploy gas  1593445 = 1549929 + round(2*195821/9)
//   congress deploy gas   2181604 = 2181014 + 2*295
//   flat call gas 30000, dispatch (transfer) gas 21000, gas price 1

namespace {

void check_escrow_matches_ledger(const World& world, const DataShareContract& contract) {
  CHECK(contract.escrow().total() == world.ledger.balance_of(contract.address()));
}

}  // namespace

TEST_CASE("datashare deployment gas is linear between the measured endpoints") {
  CHECK(datashare_deploy_gas(1) == 1549929);
  CHECK(datashare_deploy_gas(10) == 1745750);
  CHECK(datashare_deploy_gas(5) == 1636961);  // round(4*195821/9) = 87032
  CHECK(datashare_deploy_gas(3) == 1593445);
  for (std::size_t v = 1; v < 20; ++v) {
    CHECK(datashare_deploy_gas(v + 1) > datashare_deploy_gas(v));
  }
  CHECK_FAILS_WITH(datashare_deploy_gas(0), ErrorCode::InvalidRange);
}

TEST_CASE("deposit breakdown follows the deposit decomposition") {
  DepositBreakdown b{Wei{100}, Wei{50}, Wei{10}};
  CHECK(b.total() == Wei{160});
  DepositBreakdown zero_payment{Wei{0}, Wei{50}, Wei{10}};
  CHECK(zero_payment.total() == Wei{60});
}

TEST_CASE("factory_create escrows exactly payment + deposit + gas money") {
  World world;
  Wei eq1 = world.sealed.terms.payment + world.sealed.terms.requester_deposit + world.sealed.terms.gas_money;
  CHECK(eq1 == Wei{390000});

  SUBCASE("the exact sum deploys and escrows") {
    Wei requester_before = world.ledger.balance_of(world.requester.address);
    auto contract = world.create_contract();
    CHECK(contract->state() == ShareState::Deployed);
    CHECK(world.ledger.balance_of(contract->address()) == eq1);
    CHECK(world.ledger.balance_of(world.requester.address) == requester_before - eq1 - Wei{1593445});
    CHECK(contract->escrow().payment == Wei{100000});
    CHECK(contract->escrow().requester_deposit == Wei{50000});
    CHECK(contract->escrow().gas_allowance == Wei{240000});
    CHECK(contract->expires_at() == contract->created_at() + world.sealed.terms.contract_lifetime);
    check_escrow_matches_ledger(world, *contract);

    LogFilter filter;
    filter.kind = "NOTIFY_PROVIDER";
    CHECK(world.ledger.query_log(filter).size() == 1);
  }
  SUBCASE("one wei short is an insufficient deposit") {
    CHECK_FAILS_WITH(
        world.factory.create(world.sealed, world.requester.keys.sign.pub, world.provider.keys.sign.pub,
                             eq1 - Wei{1}),
        ErrorCode::InsufficientDeposit);
  }
  SUBCASE("zero-price sharing is valid") {
    WorldConfig cfg;
    cfg.payment = Wei{0};
    cfg.default_compensation = Wei{100000};
    World free_world(cfg);
    auto contract = free_world.create_contract();
    CHECK(contract->state() == ShareState::Deployed);
    CHECK(free_world.ledger.balance_of(contract->address()) == Wei{290000});
  }
  SUBCASE("unsealed terms are rejected") {
    SealedAgreement broken = world.sealed;
    broken.provider_sig[0] ^= 0x01;
    CHECK_FAILS_WITH(world.factory.create(broken, world.requester.keys.sign.pub,
                                          world.provider.keys.sign.pub, eq1),
                     ErrorCode::UnsealedTerms);
  }
}

TEST_CASE("provider_deposit binds the provider") {
  World world;
  auto contract = world.create_contract();

  SUBCASE("the exact deposit moves the state to ProviderBound") {
    Wei before = world.ledger.balance_of(world.provider.address);
    contract->provider_deposit(world.provider.address, Wei{50000});
    CHECK(contract->state() == ShareState::ProviderBound);
    CHECK(contract->escrow().provider_deposit == Wei{50000});
    CHECK(world.ledger.balance_of(world.provider.address) == before - Wei{50000} - Wei{30000});
    check_escrow_matches_ledger(world, *contract);
  }
  SUBCASE("a wrong amount changes nothing") {
    std::size_t events = world.ledger.log().size();
    CHECK_FAILS_WITH(contract->provider_deposit(world.provider.address, Wei{49999}), ErrorCode::WrongAmount);
    CHECK(contract->state() == ShareState::Deployed);
    CHECK(world.ledger.log().size() == events);
  }
  SUBCASE("a second deposit is a wrong state") {
    contract->provider_deposit(world.provider.address, Wei{50000});
    CHECK_FAILS_WITH(contract->provider_deposit(world.provider.address, Wei{50000}), ErrorCode::WrongState);
  }
  SUBCASE("only the agreed provider may deposit") {
    CHECK_FAILS_WITH(contract->provider_deposit(world.requester.address, Wei{50000}), ErrorCode::NotProvider);
  }
}

TEST_CASE("deliver_link dispatches the payment without delay") {
  World world;
  auto contract = world.create_contract();
  EnvelopeBundle bundle = world.dummy_bundle();

  SUBCASE("delivery on ProviderBound pays the provider atomically") {
    contract->provider_deposit(world.provider.address, Wei{50000});
    Wei before = world.ledger.balance_of(world.provider.address);
    contract->deliver_link(world.provider.address, bundle);
    CHECK(contract->state() == ShareState::LinkDelivered);
    CHECK(world.ledger.balance_of(world.provider.address) == before + Wei{100000} - Wei{30000});
    CHECK(contract->escrow().payment == Wei{0});
    CHECK(contract->escrow().gas_allowance == Wei{219000});  // one dispatch drew 21000
    check_escrow_matches_ledger(world, *contract);

    LogFilter filter;
    filter.kind = "LINK_DELIVERED";
    auto events = world.ledger.query_log(filter);
    REQUIRE(events.size() == 1);
    CHECK(events[0].payload.at("bundle_digest") == crypto::sha256_hex(bundle.serialize()));
  }
  SUBCASE("delivery before the provider deposit is out of order") {
    CHECK_FAILS_WITH(contract->deliver_link(world.provider.address, bundle), ErrorCode::WrongState);
  }
  SUBCASE("the requester cannot deliver") {
    contract->provider_deposit(world.provider.address, Wei{50000});
    CHECK_FAILS_WITH(contract->deliver_link(world.requester.address, bundle), ErrorCode::NotProvider);
  }
}

TEST_CASE("confirm_retrieval requires a recorded retrieval") {
  World world;
  auto contract = world.create_contract();
  contract->provider_deposit(world.provider.address, Wei{50000});
  EnvelopeBundle bundle = world.dummy_bundle();
  contract->deliver_link(world.provider.address, bundle);

  SUBCASE("before any fetch the link is not consumed") {
    CHECK_FAILS_WITH(contract->confirm_retrieval(world.requester.address), ErrorCode::LinkNotConsumed);
  }
  SUBCASE("after the cloud logs the retrieval the state advances") {
    world.simulate_retrieval(bundle);
    contract->confirm_retrieval(world.requester.address);
    CHECK(contract->state() == ShareState::Retrieved);
    CHECK_FAILS_WITH(contract->confirm_retrieval(world.requester.address), ErrorCode::WrongState);
  }
  SUBCASE("a retrieval of some other link does not count") {
    world.simulate_retrieval(world.dummy_bundle());  // different enc_link, different commitment
    CHECK_FAILS_WITH(contract->confirm_retrieval(world.requester.address), ErrorCode::LinkNotConsumed);
  }
  SUBCASE("only the requester confirms") {
    world.simulate_retrieval(bundle);
    CHECK_FAILS_WITH(contract->confirm_retrieval(world.provider.address), ErrorCode::NotRequester);
  }
}

TEST_CASE("the happy path settles to the committed balance sheet") {
  World world;
  Wei requester_start = world.ledger.balance_of(world.requester.address);
  Wei provider_start = world.ledger.balance_of(world.provider.address);
  Wei supply = world.ledger.total_balance();

  auto contract = world.create_contract();
  contract->provider_deposit(world.provider.address, Wei{50000});
  EnvelopeBundle bundle = world.dummy_bundle();
  contract->deliver_link(world.provider.address, bundle);
  world.simulate_retrieval(bundle);
  contract->confirm_retrieval(world.requester.address);
  contract->mutual_destroy(world.sign_close(world.requester, contract->address()),
                           world.sign_close(world.provider, contract->address()));

  CHECK(contract->state() == ShareState::Closed);
  CHECK(contract->close_reason() == CloseReason::MutualDestroy);
  CHECK(world.ledger.balance_of(contract->address()) == Wei{0});
  CHECK_FALSE(world.ledger.contract_live(contract->address()));

  // provider net: +payment - 2 flat calls = +100000 - 60000
  CHECK(world.ledger.balance_of(world.provider.address) == provider_start + Wei{40000});
  // requester net: -(payment + deploy + 1 flat call + 3 dispatch draws)
  //              = -(100000 + 1593445 + 30000 + 63000) = -1786445
  CHECK(world.ledger.balance_of(world.requester.address) == requester_start - Wei{1786445});
  CHECK(world.ledger.total_balance() == supply);
}

TEST_CASE("mutual_destroy needs both signatures and no open vote") {
  World world;
  auto contract = world.create_contract();

  SUBCASE("one signature is not enough") {
    CHECK_FAILS_WITH(
        contract->mutual_destroy(world.sign_close(world.requester, contract->address()), std::nullopt),
        ErrorCode::MissingSignature);
    CHECK_FAILS_WITH(
        contract->mutual_destroy(std::nullopt, world.sign_close(world.provider, contract->address())),
        ErrorCode::MissingSignature);
  }
  SUBCASE("a signature by the wrong party does not verify") {
    CHECK_FAILS_WITH(contract->mutual_destroy(world.sign_close(world.provider, contract->address()),
                                              world.sign_close(world.provider, contract->address())),
                     ErrorCode::MissingSignature);
  }
  SUBCASE("an open vote blocks destruction") {
    contract->raise_breach(world.requester.address, "data is incomplete", std::nullopt, world.congress);
    CHECK_FAILS_WITH(contract->mutual_destroy(world.sign_close(world.requester, contract->address()),
                                              world.sign_close(world.provider, contract->address())),
                     ErrorCode::VoteInProgress);
  }
  SUBCASE("destruction refunds the deposits to their owners") {
    Wei requester_before = world.ledger.balance_of(world.requester.address);
    contract->mutual_destroy(world.sign_close(world.requester, contract->address()),
                             world.sign_close(world.provider, contract->address()));
    // requester refund: payment(100000) + deposit(50000) + allowance(240000-21000) = 369000
    CHECK(world.ledger.balance_of(world.requester.address) == requester_before + Wei{369000});
    CHECK_FAILS_WITH(contract->mutual_destroy(std::nullopt, std::nullopt), ErrorCode::AlreadyClosed);
  }
}

TEST_CASE("expire refunds lazily after the lifetime") {
  World world;
  auto contract = world.create_contract();

  SUBCASE("one second early is not yet expired") {
    world.ledger.advance_time(world.config.contract_lifetime - 1);
    CHECK_FAILS_WITH(contract->expire(world.ledger.now()), ErrorCode::NotYetExpired);
  }
  SUBCASE("at the boundary the contract expires with refunds") {
    world.ledger.advance_time(world.config.contract_lifetime);
    Wei requester_before = world.ledger.balance_of(world.requester.address);
    contract->expire(world.ledger.now());
    CHECK(contract->close_reason() == CloseReason::Expired);
    CHECK(world.ledger.balance_of(world.requester.address) == requester_before + Wei{369000});
  }
  SUBCASE("a provider that never bound idles until expiry and the requester is refunded") {
    // no provider_deposit at all
    world.ledger.advance_time(world.config.contract_lifetime + 5);
    contract->expire(world.ledger.now());
    CHECK(contract->state() == ShareState::Closed);
    CHECK(contract->escrow().provider_deposit == Wei{0});
  }
}

TEST_CASE("expire after a penalty that consumed all escrow pays zero refunds") {
  WorldConfig cfg;
  cfg.gas_money = Wei{0};  // no allowance: the deposits are the whole escrow after delivery
  World world(cfg);
  auto contract = world.create_contract();
  contract->provider_deposit(world.provider.address, Wei{50000});
  contract->deliver_link(world.provider.address, world.dummy_bundle());
  CHECK(world.ledger.balance_of(contract->address()) == Wei{100000});  // the two deposits

  auto vote = contract->raise_breach(world.requester.address, "the data is incorrect", std::nullopt,
                                     world.congress);
  for (const auto& arbiter : world.arbiters) {
    vote->cast_vote(arbiter.address, Ballot::Yes, world.ledger.now());
  }
  world.ledger.advance_time(world.config.voting_time);
  vote->tally(world.ledger.now(), world.sealed.terms.quorum, world.sealed.terms.voting_margin);
  vote->execute_decision();

  CHECK(world.ledger.balance_of(contract->address()) == Wei{0});
  CHECK(contract->state() != ShareState::Closed);  // stays open until expiry

  world.ledger.advance_time(world.config.contract_lifetime);
  Wei requester_before = world.ledger.balance_of(world.requester.address);
  Wei provider_before = world.ledger.balance_of(world.provider.address);
  contract->expire(world.ledger.now());
  CHECK(contract->close_reason() == CloseReason::Expired);
  CHECK(world.ledger.balance_of(world.requester.address) == requester_before);
  CHECK(world.ledger.balance_of(world.provider.address) == provider_before);
}

TEST_CASE("raise_breach spawns a vote and records history") {
  World world;
  auto contract = world.create_contract();

  SUBCASE("a third party cannot accuse") {
    CHECK_FAILS_WITH(contract->raise_breach(world.arbiters[0].address, "outsider", std::nullopt,
                                            world.congress),
                     ErrorCode::NotParty);
  }
  SUBCASE("the accuser pays the congress deployment gas") {
    Wei before = world.ledger.balance_of(world.requester.address);
    contract->raise_breach(world.requester.address, "data is incomplete", std::nullopt, world.congress);
    CHECK(world.ledger.balance_of(world.requester.address) == before - Wei{2181604});
    CHECK(contract->active_vote().has_value());
    CHECK(contract->breach_history().size() == 1);
    CHECK(contract->breach_history()[0].decision == "pending");
  }
  SUBCASE("the provider may accuse too") {
    contract->raise_breach(world.provider.address, "payment is not made at all", std::nullopt,
                           world.congress);
    CHECK(contract->breach_history()[0].accuser == world.provider.address);
  }
  SUBCASE("one vote at a time") {
    contract->raise_breach(world.requester.address, "first", std::nullopt, world.congress);
    CHECK_FAILS_WITH(contract->raise_breach(world.requester.address, "second", std::nullopt, world.congress),
                     ErrorCode::VoteInProgress);
  }
  SUBCASE("expiry is blocked while a vote is open") {
    contract->raise_breach(world.requester.address, "breach", std::nullopt, world.congress);
    world.ledger.advance_time(world.config.contract_lifetime + 1);
    CHECK_FAILS_WITH(contract->expire(world.ledger.now()), ErrorCode::VoteInProgress);
  }
}

TEST_CASE("escrow attribution always matches the ledger balance") {
  World world;
  auto contract = world.create_contract();
  check_escrow_matches_ledger(world, *contract);
  contract->provider_deposit(world.provider.address, Wei{50000});
  check_escrow_matches_ledger(world, *contract);
  EnvelopeBundle bundle = world.dummy_bundle();
  contract->deliver_link(world.provider.address, bundle);
  check_escrow_matches_ledger(world, *contract);
  world.simulate_retrieval(bundle);
  contract->confirm_retrieval(world.requester.address);
  check_escrow_matches_ledger(world, *contract);
  contract->mutual_destroy(world.sign_close(world.requester, contract->address()),
                           world.sign_close(world.provider, contract->address()));
  check_escrow_matches_ledger(world, *contract);
}

TEST_CASE("the contract state snapshot exports as JSON") {
  World world;
  auto contract = world.create_contract();
  contract->provider_deposit(world.provider.address, Wei{50000});
  contract->raise_breach(world.requester.address, "probe", std::nullopt, world.congress);

  nlohmann::ordered_json j = contract->snapshot();
  CHECK(j.at("address") == contract->address().to_hex());
  CHECK(j.at("state") == "ProviderBound");
  CHECK(j.at("escrow").at("payment") == 100000);
  CHECK(j.at("escrow").at("provider_deposit") == 50000);
  CHECK(j.at("escrow").at("total") == 440000);
  CHECK(j.at("expires_at") == contract->expires_at());
  CHECK(j.contains("active_vote"));
  REQUIRE(j.at("breach_history").size() == 1);
  CHECK(j.at("breach_history")[0].at("decision") == "pending");
}

TEST_CASE("operations on a closed contract are rejected") {
  World world;
  auto contract = world.create_contract();
  contract->mutual_destroy(world.sign_close(world.requester, contract->address()),
                           world.sign_close(world.provider, contract->address()));
  CHECK(world.ledger.balance_of(contract->address()) == Wei{0});
  CHECK_FAILS_WITH(contract->provider_deposit(world.provider.address, Wei{50000}), ErrorCode::WrongState);
  CHECK_FAILS_WITH(contract->deliver_link(world.provider.address, world.dummy_bundle()),
                   ErrorCode::WrongState);
  CHECK_FAILS_WITH(contract->raise_breach(world.requester.address, "late", std::nullopt, world.congress),
                   ErrorCode::AlreadyClosed);
  CHECK_FAILS_WITH(contract->expire(world.ledger.now() + 1000000000), ErrorCode::AlreadyClosed);
}
