#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "amflow/stack_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* amflow_bin() {
    const char* bin = std::getenv("AMFLOW_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "AMFLOW_BIN must point at the amflow binary");
    return bin;
}

const char* scenes_dir() {
    const char* dir = std::getenv("AMFLOW_SCENES");
    REQUIRE_MESSAGE(dir != nullptr, "AMFLOW_SCENES must point at the scenes directory");
    return dir;
}

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path out = fs::temp_directory_path() / ("amflow_cli_out_" + std::to_string(counter));
    const fs::path err = fs::temp_directory_path() / ("amflow_cli_err_" + std::to_string(counter));
    ++counter;

    const std::string cmd = std::string(amflow_bin()) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());

    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("").code == 2);
    CHECK(run("does-not-exist").code == 2);
    CHECK(run("eval --gt /tmp").code == 2);                    // missing --pred
    CHECK(run("baseline --method nope --flow /tmp --masks /tmp --out /tmp").code == 2);
}

TEST_CASE("gen rejects invalid scenes with exit code 2") {
    testutil::TempDir tmp;
    std::ofstream(tmp.path / "broken.json") << "{ not json";
    const RunResult r =
        run("gen --scene " + q(tmp.path / "broken.json") + " --out " + q(tmp.path / "out"));
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("gen then self-eval reports AFQ 1.000000") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation_occluded.json";
    const fs::path gt = tmp.path / "gt";

    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);
    REQUIRE(fs::exists(gt / "manifest.json"));

    const fs::path report = tmp.path / "report.json";
    const RunResult r =
        run("eval --gt " + q(gt) + " --pred " + q(gt) + " --json " + q(report));
    CHECK(r.code == 0);
    CHECK(r.out.find("AFQ") != std::string::npos);
    CHECK(r.out.find("1.000000") != std::string::npos);

    const auto doc = nlohmann::json::parse(slurp(report));
    CHECK(doc.at("afq").get<double>() == 1.0);
    CHECK(doc.at("mwauc").get<double>() == 1.0);
    CHECK(doc.at("miou").get<double>() == 1.0);
}

TEST_CASE("eval lists missing prediction frames and exits 2") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    const fs::path pred = tmp.path / "pred";
    fs::create_directories(pred); // empty prediction directory
    const RunResult r = run("eval --gt " + q(gt) + " --pred " + q(pred));
    CHECK(r.code == 2);
    CHECK(r.err.find("frame_000000") != std::string::npos);
}

TEST_CASE("baseline pipeline reaches AFQ 1.0 on the translation fixture") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation_occluded.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    for (const std::string method : {"near-boundary", "mean"}) {
        const fs::path out = tmp.path / ("pred_" + method);
        REQUIRE(run("baseline --method " + method + " --flow " + q(gt) + " --masks " + q(gt) +
                    " --out " + q(out))
                    .code == 0);
        const fs::path report = tmp.path / (method + ".json");
        REQUIRE(run("eval --gt " + q(gt) + " --pred " + q(out) + " --json " + q(report)).code ==
                0);
        const auto doc = nlohmann::json::parse(slurp(report));
        CHECK(doc.at("afq").get<double>() == 1.0);
    }
}

TEST_CASE("zero baseline on the static fixture scores full mWAUC") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "static.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    const fs::path out = tmp.path / "pred";
    REQUIRE(run("baseline --method zero --flow " + q(gt) + " --masks " + q(gt) + " --out " +
                q(out))
                .code == 0);
    const fs::path report = tmp.path / "zero.json";
    REQUIRE(run("eval --gt " + q(gt) + " --pred " + q(out) + " --json " + q(report)).code == 0);
    const auto doc = nlohmann::json::parse(slurp(report));
    CHECK(doc.at("mwauc").get<double>() == 1.0);
}

TEST_CASE("track subcommand") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    SUBCASE("single object keeps one id") {
        const fs::path track = tmp.path / "track.json";
        const RunResult r =
            run("track --seg " + q(gt) + " --flow " + q(gt) + " --out " + q(track));
        CHECK(r.code == 0);
        const auto doc = nlohmann::json::parse(slurp(track));
        CHECK(doc.at("score").at("id_switches").get<int>() == 0);
        CHECK(doc.at("score").at("association_accuracy").get<double>() == 1.0);
    }

    SUBCASE("missing flow frames exit 2") {
        fs::remove(gt / "frame_000000" / "modal.flo");
        const RunResult r =
            run("track --seg " + q(gt) + " --flow " + q(gt) + " --out " + q(tmp.path / "t.json"));
        CHECK(r.code == 2);
        CHECK(r.err.find("missing") != std::string::npos);
    }
}

TEST_CASE("stats subcommand") {
    testutil::TempDir tmp;

    SUBCASE("empty directory exits 2") {
        fs::create_directories(tmp.path / "empty");
        CHECK(run("stats --flow " + q(tmp.path / "empty") + " --out " + q(tmp.path / "s.csv"))
                  .code == 2);
    }

    SUBCASE("csv has header plus 36 + 101 rows") {
        const fs::path scene = fs::path(scenes_dir()) / "translation.json";
        const fs::path gt = tmp.path / "gt";
        REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);
        const fs::path csv = tmp.path / "s.csv";
        REQUIRE(run("stats --flow " + q(gt) + " --out " + q(csv)).code == 0);
        std::istringstream lines(slurp(csv));
        std::string line;
        int n = 0;
        while (std::getline(lines, line)) ++n;
        CHECK(n == 1 + 36 + 101);
    }
}

TEST_CASE("viz subcommand") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    SUBCASE("writes a composite png") {
        const fs::path png = tmp.path / "viz.png";
        CHECK(run("viz --stack " + q(gt) + " --frame 0 --out " + q(png)).code == 0);
        CHECK(fs::exists(png));
    }

    SUBCASE("out-of-range frame exits 2") {
        CHECK(run("viz --stack " + q(gt) + " --frame 99 --out " + q(tmp.path / "x.png")).code ==
              2);
    }
}

TEST_CASE("eval output is byte-identical across thread counts") {
    testutil::TempDir tmp;
    const fs::path scene = fs::path(scenes_dir()) / "translation_occluded.json";
    const fs::path gt = tmp.path / "gt";
    REQUIRE(run("gen --scene " + q(scene) + " --out " + q(gt)).code == 0);

    const fs::path r1 = tmp.path / "r1.json", r8 = tmp.path / "r8.json";
    const RunResult a =
        run("--threads 1 eval --gt " + q(gt) + " --pred " + q(gt) + " --json " + q(r1));
    const RunResult b =
        run("--threads 8 eval --gt " + q(gt) + " --pred " + q(gt) + " --json " + q(r8));
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(slurp(r1) == slurp(r8));
}
