#include "invt/error.hpp"
#include "invt/experiment.hpp"
#include "invt/http_service.hpp"
#include "invt/png_io.hpp"
#include "invt/trial_log.hpp"

#include "test_util.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace invt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// One reference and one distorted PNG per level, all with distinct bytes.
std::vector<StimulusLevel> write_stimuli(const fs::path& dir, const std::vector<double>& levels) {
    fs::create_directories(dir / "png");
    std::vector<StimulusLevel> out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto ref = dir / "png" / ("ref" + std::to_string(i) + ".png");
        const auto dis = dir / "png" / ("dis" + std::to_string(i) + ".png");
        save_image(quantize8(testutil::random_image(8, 8, 3, 2 * i)), ref);
        save_image(quantize8(testutil::random_image(8, 8, 3, 2 * i + 1)), dis);
        out.push_back({levels[i], ref.string(), dis.string()});
    }
    write_stimulus_manifest(out, dir / "manifest.csv");
    return out;
}

std::int64_t fixed_clock() { return 1234; }

struct Server {
    ExperimentService service;
    int port;
    std::thread thread;

    Server(ExperimentStore& store) : service(store, {"127.0.0.1", 0, std::nullopt, 15, 1}) {
        port = service.bind();
        thread = std::thread([this] { service.serve(); });
        service.wait_ready();
    }
    ~Server() {
        service.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("stimulus manifest round trip and relative paths") {
    const auto dir = testutil::tmp_dir("exp_manifest");
    const auto levels = write_stimuli(dir, {0.1, 0.5});
    const auto back = read_stimulus_manifest(dir / "manifest.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[1].level == 0.5);
    CHECK(fs::equivalent(back[1].distorted, levels[1].distorted));

    std::ofstream(dir / "rel.csv") << "level,reference,distorted\n0.25,png/ref0.png,png/dis0.png\n";
    const auto rel = read_stimulus_manifest(dir / "rel.csv");
    CHECK(fs::equivalent(rel[0].reference, dir / "png" / "ref0.png"));
}

TEST_CASE("store: cursor, conflicts and logging") {
    const auto dir = testutil::tmp_dir("exp_store");
    const auto stimuli = write_stimuli(dir / "stim", {0.1, 0.3, 0.6});
    ExperimentStore store(dir / "data", stimuli, fixed_clock);
    const std::string id = store.create_session({"obs", 2, 9, "D"});
    const auto first = store.next_trial(id);
    REQUIRE(first);
    CHECK(first->trial_index == 0);
    CHECK(first->total == 6);
    CHECK(store.next_trial(id)->left == first->left);  // peeking does not advance

    CHECK_THROWS_AS(store.submit_response(id, 1, Choice::left), ConflictError);
    const TrialRecord r = store.submit_response(id, 0, Choice::right);
    CHECK(r.trial_index == 0);
    CHECK(r.timestamp_ms == 1234);
    CHECK(r.correct == !r.distorted_first);
    try {
        store.submit_response(id, 0, Choice::right);
        FAIL("expected ConflictError");
    } catch (const ConflictError& e) {
        CHECK(e.cursor() == 1);
    }
    for (std::size_t i = 1; i < 6; ++i) store.submit_response(id, i, Choice::left);
    CHECK_FALSE(store.next_trial(id));
    CHECK_THROWS_AS(store.submit_response(id, 6, Choice::left), ConflictError);

    const auto s = store.summary(id);
    CHECK(s.complete);
    CHECK(s.cursor == 6);
    std::size_t n = 0;
    for (const auto& l : s.levels) {
        CHECK(l.n == 2);
        n += l.n;
    }
    CHECK(n == 6);
    const auto log = read_trial_log(store.log_path(id));
    CHECK(log.size() == 6);
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].trial_index == i);

    CHECK_THROWS_AS(store.next_trial("nope"), NotFoundError);
    CHECK_THROWS_AS(store.stimulus_bytes("deadbeef"), NotFoundError);
}

TEST_CASE("store: keys are opaque and bytes are the files") {
    const auto dir = testutil::tmp_dir("exp_keys");
    const auto stimuli = write_stimuli(dir / "stim", {0.2, 0.4});
    ExperimentStore store(dir / "data", stimuli);
    const std::string id = store.create_session({"obs", 3, 1, "D"});
    const auto t = *store.next_trial(id);
    for (const auto& key : {t.left, t.right}) {
        CHECK(key.find("dis") == std::string::npos);
        CHECK(key.find("ref") == std::string::npos);
    }
    std::set<std::string> files;
    for (const auto& s : stimuli) {
        files.insert(slurp(s.reference));
        files.insert(slurp(s.distorted));
    }
    for (const auto& key : {t.left, t.right}) {
        const auto bytes = store.stimulus_bytes(key);
        CHECK(files.count(std::string(bytes.begin(), bytes.end())) == 1);
    }
}

TEST_CASE("store: sessions are replayed from disk") {
    const auto dir = testutil::tmp_dir("exp_replay");
    const auto stimuli = write_stimuli(dir / "stim", {0.1, 0.3, 0.6});
    std::string id;
    TrialPayload before;
    {
        ExperimentStore store(dir / "data", stimuli);
        id = store.create_session({"obs", 2, 4, "D"});
        store.submit_response(id, 0, Choice::left);
        store.submit_response(id, 1, Choice::right);
        before = *store.next_trial(id);
    }
    ExperimentStore again(dir / "data", stimuli);
    CHECK(again.session_ids() == std::vector<std::string>{id});
    const auto after = again.next_trial(id);
    REQUIRE(after);
    CHECK(after->trial_index == 2);
    CHECK(after->left == before.left);
    CHECK(after->right == before.right);
    CHECK(again.summary(id).cursor == 2);
    const std::string second = again.create_session({"obs2", 1, 4, "D"});
    CHECK(second != id);
}

TEST_CASE("store: missing stimulus files are a configuration error") {
    const auto dir = testutil::tmp_dir("exp_missing");
    auto stimuli = write_stimuli(dir / "stim", {0.1, 0.3});
    fs::remove(stimuli[1].distorted);
    ExperimentStore store(dir / "data", stimuli);
    CHECK_THROWS_AS(store.create_session({"obs", 1, 1, "D"}), ConfigError);
}

TEST_CASE("HTTP: simulated observer session fits near its threshold") {
    const auto dir = testutil::tmp_dir("exp_http");
    const auto levels = testutil::linspace(0.05, 1.0, 20);
    const auto stimuli = write_stimuli(dir / "stim", levels);
    std::map<std::string, double> distorted_level;
    for (const auto& s : stimuli) distorted_level[slurp(s.distorted)] = s.level;

    ExperimentStore store(dir / "data", stimuli);
    Server server(store);
    httplib::Client cli("127.0.0.1", server.port);

    auto res = cli.Post("/api/session", R"({"observer": "sim", "reps": 15, "seed": 3})", "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 201);
    const std::string id = json::parse(res->body).at("id");
    CHECK(json::parse(res->body).at("total") == 300);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t answered = 0;
    for (;;) {
        auto t = cli.Get("/api/session/" + id + "/trial");
        REQUIRE(t);
        REQUIRE(t->status == 200);
        const json j = json::parse(t->body);
        if (j.at("done").get<bool>()) break;
        auto left = cli.Get(j.at("left").get<std::string>());
        auto right = cli.Get(j.at("right").get<std::string>());
        REQUIRE(left);
        REQUIRE(right);
        CHECK(left->get_header_value("Content-Type") == "image/png");
        const bool left_distorted = distorted_level.count(left->body) == 1;
        const double level = left_distorted ? distorted_level[left->body] : distorted_level.at(right->body);
        const bool correct = u(rng) < psychometric_probability(level, 40.0, 0.44);
        const std::string choice = (left_distorted == correct) ? "left" : "right";
        const json body{{"trial_index", j.at("trial_index")}, {"choice", choice}};
        auto r = cli.Post("/api/session/" + id + "/response", body.dump(), "application/json");
        REQUIRE(r);
        REQUIRE(r->status == 200);
        ++answered;
        if (answered == 5) {
            // Resubmitting the same trial is rejected with the current cursor.
            auto dup = cli.Post("/api/session/" + id + "/response", body.dump(), "application/json");
            REQUIRE(dup);
            CHECK(dup->status == 409);
            CHECK(json::parse(dup->body).at("cursor") == 5);
        }
    }
    CHECK(answered == 300);

    auto sum = cli.Get("/api/session/" + id + "/summary");
    REQUIRE(sum);
    const json s = json::parse(sum->body);
    CHECK(s.at("complete") == true);
    CHECK(s.at("levels").size() == 20);

    const auto log = read_trial_log(store.log_path(id));
    CHECK(log.size() == 300);
    std::set<std::size_t> idx;
    for (const auto& r : log) idx.insert(r.trial_index);
    CHECK(idx.size() == 300);
    const auto fit = fit_psychometric(log, {100, 1, 1});
    CHECK(std::abs(fit.tau - 0.44) < 0.1);
}

TEST_CASE("HTTP: error statuses") {
    const auto dir = testutil::tmp_dir("exp_http_err");
    const auto stimuli = write_stimuli(dir / "stim", {0.1, 0.3});
    ExperimentStore store(dir / "data", stimuli);
    Server server(store);
    httplib::Client cli("127.0.0.1", server.port);

    CHECK(cli.Get("/api/session/zzz/trial")->status == 404);
    CHECK(cli.Get("/api/stimulus/abc123")->status == 404);
    CHECK(cli.Post("/api/session", "{not json", "application/json")->status == 400);
    auto created = cli.Post("/api/session", R"({"observer": "o", "reps": 1})", "application/json");
    REQUIRE(created->status == 201);
    const std::string id = json::parse(created->body).at("id");
    CHECK(cli.Post("/api/session/" + id + "/response", R"({"trial_index": 0, "choice": "up"})", "application/json")
              ->status == 400);
    CHECK(cli.Post("/api/session/" + id + "/response", R"({"choice": "left"})", "application/json")->status == 400);
    CHECK(cli.Post("/api/session/" + id + "/response", R"({"trial_index": 1, "choice": "left"})", "application/json")
              ->status == 409);

    fs::remove(stimuli[0].reference);
    CHECK(cli.Post("/api/session", R"({"observer": "o"})", "application/json")->status == 422);
}
