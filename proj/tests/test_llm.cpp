#include <doctest.h>

#include <random>
#include <string>
#include <thread>

#include "fctn/llm_client.hpp"
#include "fctn/llm_strategy.hpp"
#include "fctn/prompts.hpp"

// Include last: httplib drags in <resolv.h>, whose _res macro breaks Eigen
// if it is seen first.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

using namespace fctn;

namespace {

TensorMeta finance_meta() {
    TensorMeta meta;
    meta.shape = {3, 6, 3, 4, 5};
    meta.mode_descriptions = {"Types of financial instruments", "Assets within each type",
                              "Price features", "Sampling intervals",
                              "Time points within each rolling window"};
    meta.domain_label = "quantitative finance";
    meta.bounds = rank_upper_bounds(meta.shape, BoundPolicy::max_of_modes);
    return meta;
}

TensorMeta small_meta() {
    TensorMeta meta;
    meta.shape = {2, 3, 2};
    meta.mode_descriptions = {"rows", "columns", "layers"};
    meta.domain_label = "testing";
    meta.bounds = rank_upper_bounds(meta.shape, BoundPolicy::max_of_modes);
    return meta;
}

RankAssignment make_ranks(int order, std::vector<Index> vals) {
    RankAssignment r(order);
    const auto edges = r.edges();
    REQUIRE(edges.size() == vals.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        r.set(edges[e].first, edges[e].second, vals[e]);
    return r;
}

IterationRecord record_with(RankAssignment ranks, double train_loss) {
    IterationRecord rec;
    rec.ranks = std::move(ranks);
    rec.train.loss = train_loss;
    return rec;
}

} // namespace

TEST_CASE("Conversation enforces nonempty content and a leading system message") {
    Conversation c;
    CHECK_THROWS_AS(c.append({Role::user, "hi"}), ProtocolError);
    CHECK_THROWS_AS(c.append({Role::system, ""}), ProtocolError);
    c.append({Role::system, "s"});
    c.append({Role::user, "u"});
    CHECK(c.size() == 2);
}

TEST_CASE("token_budget_check uses the chars/4 ceiling plus reserved output") {
    ClientParams params;
    Conversation empty;
    const TokenBudget b = token_budget_check(empty, params);
    CHECK(b.projected_tokens == 3000);
    CHECK(b.ok);

    Conversation one;
    one.append({Role::system, std::string(10, 'x')});
    CHECK(token_budget_check(one, params).projected_tokens == 3000 + 3);

    Conversation big;
    big.append({Role::system, std::string(4 * 130000, 'x')});
    CHECK_FALSE(token_budget_check(big, params).ok);
}

TEST_CASE("system message carries every mandated element") {
    const auto msg = build_system_message(finance_meta(), 1e3);
    CHECK(msg.role == Role::system);
    CHECK(msg.content.find("domain expert in quantitative finance") != std::string::npos);
    CHECK(msg.content.find("domain knowledge") != std::string::npos);
    CHECK(msg.content.find("exact format") != std::string::npos);
    CHECK(msg.content.find("minimise the loss") != std::string::npos);
    CHECK(msg.content.find("log10(CR) + 1000 *") != std::string::npos);
    CHECK(msg.content.find("compression ratio") != std::string::npos);
    CHECK(msg.content.find("rank reduction") != std::string::npos);
    CHECK(msg.content.find("step-by-step") != std::string::npos);
    CHECK(msg.content.find("{{") == std::string::npos);
    // purity
    CHECK(msg.content == build_system_message(finance_meta(), 1e3).content);
}

TEST_CASE("initial prompt lists every edge bound and the output stanza") {
    const auto msg = build_initial_prompt(finance_meta(), 1e3);
    CHECK(msg.role == Role::user);
    CHECK(msg.content.find("order-5 tensors of shape 3 x 6 x 3 x 4 x 5") != std::string::npos);
    CHECK(msg.content.find("the 10 FCTN ranks") != std::string::npos);
    const auto meta = finance_meta();
    for (const auto& desc : meta.mode_descriptions)
        CHECK(msg.content.find(desc) != std::string::npos);
    int bound_lines = 0;
    for (auto [i, j] : meta.bounds.edges()) {
        std::string line = "1 <= R(" + std::to_string(i) + "," + std::to_string(j) +
                           ") <= " + std::to_string(meta.bounds.at(i, j));
        CHECK(msg.content.find(line) != std::string::npos);
        ++bound_lines;
    }
    CHECK(bound_lines == 10);
    CHECK(msg.content.find("1 <= R(1,2) <= 6") != std::string::npos);
    CHECK(msg.content.find("RANKS\n") != std::string::npos);
    CHECK(msg.content.find("R(4,5)=<value>") != std::string::npos);
    CHECK(msg.content.find("END") != std::string::npos);
    CHECK(msg.content.find("{{") == std::string::npos);
    CHECK(msg.content == build_initial_prompt(finance_meta(), 1e3).content);
}

TEST_CASE("iterative prompt shows previous and best results") {
    const auto meta = small_meta();
    const auto prev = record_with(make_ranks(3, {2, 1, 2}), -1.40);
    const auto best = record_with(make_ranks(3, {1, 1, 1}), -1.62);
    const auto msg = build_iterative_prompt(prev, best, meta, 1e3);
    CHECK(msg.role == Role::user);
    CHECK(msg.content.find("-1.4") != std::string::npos);
    CHECK(msg.content.find("-1.62") != std::string::npos);
    CHECK(msg.content.find(prev.ranks.to_string()) != std::string::npos);
    CHECK(msg.content.find(best.ranks.to_string()) != std::string::npos);
    CHECK(msg.content.find("do not repeat") != std::string::npos);
    CHECK(msg.content.find("{{") == std::string::npos);

    const auto same = build_iterative_prompt(prev, prev, meta, 1e3);
    CHECK(same.content.find("loss = -1.4\n") != std::string::npos);
    CHECK(same.content == build_iterative_prompt(prev, prev, meta, 1e3).content);
}

TEST_CASE("parse_ranks round-trips render_ranks_block for random assignments") {
    std::mt19937_64 rng(83);
    std::uniform_int_distribution<int> order_dist(3, 5);
    std::uniform_int_distribution<Index> rank_dist(1, 9);
    for (int trial = 0; trial < 40; ++trial) {
        const int order = order_dist(rng);
        RankAssignment ranks(order);
        for (auto [i, j] : ranks.edges()) ranks.set(i, j, rank_dist(rng));
        const std::string text = "Some reasoning here.\n\n" + render_ranks_block(ranks);
        CHECK(parse_ranks(text, ranks.edges()) == ranks);
        CHECK(extract_reasoning(text).find("Some reasoning here.") == 0);
    }
}

TEST_CASE("parse_ranks uses the final RANKS block") {
    const auto a = make_ranks(3, {1, 1, 1});
    const auto b = make_ranks(3, {2, 2, 2});
    const std::string text = render_ranks_block(a) + "\nOn reflection:\n" + render_ranks_block(b);
    CHECK(parse_ranks(text, a.edges()) == b);
}

TEST_CASE("parse_ranks error taxonomy") {
    const auto edges = all_edges(3);
    CHECK_THROWS_AS(parse_ranks("no block at all", edges), ParseFailure);
    CHECK_THROWS_AS(parse_ranks("RANKS\nR(1,2)=1\nR(1,3)=1\nR(2,3)=1\n", edges), ParseFailure);
    CHECK_THROWS_AS(parse_ranks("RANKS\nR(1,2)=1\nwhat\nEND\n", edges), ParseFailure);
    try {
        parse_ranks("RANKS\nR(1,2)=1\nR(1,3)=1\nEND\n", edges);
        FAIL("expected MissingEdge");
    } catch (const MissingEdge& e) {
        CHECK(e.i == 2);
        CHECK(e.j == 3);
    }
    CHECK_THROWS_AS(parse_ranks("RANKS\nR(1,2)=x\nR(1,3)=1\nR(2,3)=1\nEND\n", edges),
                    InvalidRankToken);
    CHECK_THROWS_AS(parse_ranks("RANKS\nR(1,2)=0\nR(1,3)=1\nR(2,3)=1\nEND\n", edges),
                    InvalidRankToken);
    CHECK_THROWS_AS(parse_ranks("RANKS\nR(1,4)=1\nR(1,2)=1\nR(1,3)=1\nR(2,3)=1\nEND\n", edges),
                    InvalidRankToken);
    CHECK_THROWS_AS(
        parse_ranks("RANKS\nR(1,2)=1\nR(1,2)=2\nR(1,3)=1\nR(2,3)=1\nEND\n", edges),
        DuplicateEdge);
}

TEST_CASE("detect_repeat") {
    const auto a = make_ranks(3, {1, 2, 3});
    auto b = a;
    b.set(1, 2, 2);
    CHECK_FALSE(detect_repeat(a, {}));
    CHECK(detect_repeat(a, {b, a}));
    CHECK_FALSE(detect_repeat(a, {b}));
}

TEST_CASE("ScriptedChatClient replays in order and records what it saw") {
    ScriptedChatClient client({"resp-A", "resp-B"});
    ClientParams params;
    Conversation conv;
    conv.append({Role::system, "s"});
    conv.append({Role::user, "u"});
    const auto a = client.send(conv, params);
    CHECK(a.role == Role::assistant);
    CHECK(a.content == "resp-A");
    CHECK(client.send(conv, params).content == "resp-B");
    CHECK_THROWS_AS(client.send(conv, params), ScriptExhausted);
    REQUIRE(client.received().size() == 3);
    CHECK(client.received()[0].size() == 2);
    CHECK(client.received()[0][1].content == "u");
    // the conversation itself is untouched by send
    CHECK(conv.size() == 2);
}

TEST_CASE("ScriptedChatClient refuses an over-budget conversation") {
    ScriptedChatClient client({"resp"});
    ClientParams params;
    params.context_window_tokens = 3100;
    Conversation conv;
    conv.append({Role::system, std::string(4 * 200, 'x')});
    CHECK_THROWS_AS(client.send(conv, params), ContextOverflow);
}

TEST_CASE("LlmRankProposer: clean iterations keep the 2 + 2t message count") {
    const auto meta = small_meta();
    ScriptedChatClient client({
        "Reasoning one.\n" + render_ranks_block(make_ranks(3, {2, 1, 2})),
        "Reasoning two.\n" + render_ranks_block(make_ranks(3, {1, 1, 1})),
    });
    LlmRankProposer proposer(meta, 1e3, client, ClientParams{});
    CHECK(proposer.conversation().size() == 2);

    const Proposal p1 = proposer.next();
    CHECK(p1.ranks == make_ranks(3, {2, 1, 2}));
    CHECK(p1.reasoning.value() == "Reasoning one.");
    CHECK_FALSE(p1.repeated);
    CHECK_FALSE(p1.retried);
    const auto rec = record_with(p1.ranks, -1.2);
    proposer.observe(rec, rec);
    CHECK(proposer.conversation().size() == 4); // 2 + 2*1

    const Proposal p2 = proposer.next();
    CHECK(p2.ranks == make_ranks(3, {1, 1, 1}));
    const auto rec2 = record_with(p2.ranks, -1.5);
    proposer.observe(rec2, rec2);
    CHECK(proposer.conversation().size() == 6); // 2 + 2*2
    // roles alternate after the system message
    const auto& msgs = proposer.conversation().messages;
    CHECK(msgs[0].role == Role::system);
    for (std::size_t i = 1; i < msgs.size(); ++i)
        CHECK(msgs[i].role == (i % 2 == 1 ? Role::user : Role::assistant));
}

TEST_CASE("LlmRankProposer: parse failure triggers exactly one corrective re-ask") {
    const auto meta = small_meta();
    ScriptedChatClient client({
        "just prose, no block",
        render_ranks_block(make_ranks(3, {2, 2, 2})),
    });
    LlmRankProposer proposer(meta, 1e3, client, ClientParams{});
    const Proposal p = proposer.next();
    CHECK(p.ranks == make_ranks(3, {2, 2, 2}));
    CHECK(p.retried);
    CHECK_FALSE(p.repeated);
    // system, initial, bad reply, corrective note, good reply
    CHECK(proposer.conversation().size() == 5);
    CHECK(proposer.conversation().messages[3].content.find("did not contain a valid RANKS") !=
          std::string::npos);
}

TEST_CASE("LlmRankProposer: two parse failures fail the iteration") {
    ScriptedChatClient client({"prose", "more prose"});
    LlmRankProposer proposer(small_meta(), 1e3, client, ClientParams{});
    CHECK_THROWS_AS(proposer.next(), ProposalFailed);
}

TEST_CASE("LlmRankProposer: persistent repeat is accepted and flagged") {
    const auto meta = small_meta();
    const std::string block_a = render_ranks_block(make_ranks(3, {2, 1, 2}));
    ScriptedChatClient client({block_a, block_a, block_a});
    LlmRankProposer proposer(meta, 1e3, client, ClientParams{});
    const Proposal p1 = proposer.next();
    CHECK_FALSE(p1.repeated);
    const auto rec = record_with(p1.ranks, -1.0);
    proposer.observe(rec, rec);
    const Proposal p2 = proposer.next();
    CHECK(p2.ranks == p1.ranks);
    CHECK(p2.repeated);
    CHECK(p2.retried);
    CHECK(client.responses_left() == 0);
}

TEST_CASE("LlmRankProposer: repeat re-ask can rescue with a fresh configuration") {
    const auto meta = small_meta();
    const std::string block_a = render_ranks_block(make_ranks(3, {2, 1, 2}));
    const std::string block_b = render_ranks_block(make_ranks(3, {1, 2, 1}));
    ScriptedChatClient client({block_a, block_a, block_b});
    LlmRankProposer proposer(meta, 1e3, client, ClientParams{});
    const auto rec = record_with(proposer.next().ranks, -1.0);
    proposer.observe(rec, rec);
    const Proposal p2 = proposer.next();
    CHECK(p2.ranks == make_ranks(3, {1, 2, 1}));
    CHECK_FALSE(p2.repeated);
    CHECK(p2.retried);
}

TEST_CASE("LlmRankProposer clamps out-of-bounds suggestions") {
    const auto meta = small_meta(); // bound for (1,3) is 2
    ScriptedChatClient client({render_ranks_block(make_ranks(3, {2, 9, 2}))});
    LlmRankProposer proposer(meta, 1e3, client, ClientParams{});
    CHECK(proposer.next().ranks.at(1, 3) == 2);
}

TEST_CASE("HttpChatClient talks to a local chat-completions stub") {
    httplib::Server server;
    std::string seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        res.set_content(R"({"choices":[{"message":{"content":"stub says hi"}}]})",
                        "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.status = 400;
    });
    server.Post("/flaky", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Conversation conv;
    conv.append({Role::system, "sys"});
    conv.append({Role::user, "pick ranks"});
    ClientParams params;
    params.max_retries = 1;

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    HttpChatClient good(base + "/v1/chat/completions", "");
    const ChatMessage reply = good.send(conv, params);
    CHECK(reply.role == Role::assistant);
    CHECK(reply.content == "stub says hi");
    CHECK(seen_body.find("\"model\"") != std::string::npos);
    CHECK(seen_body.find("\"messages\"") != std::string::npos);
    CHECK(seen_body.find("pick ranks") != std::string::npos);
    CHECK(seen_body.find("\"max_tokens\":3000") != std::string::npos);

    HttpChatClient broken(base + "/broken", "");
    CHECK_THROWS_AS(broken.send(conv, params), ProtocolError);
    HttpChatClient flaky(base + "/flaky", "");
    CHECK_THROWS_AS(flaky.send(conv, params), ClientUnavailable);
    HttpChatClient bad_url("not-a-url", "");
    CHECK_THROWS_AS(bad_url.send(conv, params), ProtocolError);

    server.stop();
    server_thread.join();
}
