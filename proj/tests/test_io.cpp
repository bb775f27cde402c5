#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <kerrcqa/io.hpp>

using namespace kerrcqa;
using io::json;
using C = std::complex<double>;

TEST_CASE("parameters round trip through JSON") {
  PhysicalParams p;
  p.K = 0.5;
  p.Delta = -1.25;
  p.Lambda1 = {0.1, -0.2};
  p.Lambda2 = {3, 0.25};
  p.Lambda3 = {-0.7, 1e-3};
  p.kappa1 = 0.01;
  p.kappa2 = 0.002;
  p.allow_negative_loss = true;
  const json j = json::parse(io::to_json(p).dump());
  const PhysicalParams q = io::params_from_json(j);
  CHECK(q.K == p.K);
  CHECK(q.Delta == p.Delta);
  CHECK(q.Lambda1 == p.Lambda1);
  CHECK(q.Lambda2 == p.Lambda2);
  CHECK(q.Lambda3 == p.Lambda3);
  CHECK(q.kappa1 == p.kappa1);
  CHECK(q.kappa2 == p.kappa2);
  CHECK(q.allow_negative_loss);
}

TEST_CASE("missing parameters keep their defaults") {
  const PhysicalParams q = io::params_from_json(json::parse(R"({"Lambda2": [2, 0]})"));
  CHECK(q.K == 1.0);
  CHECK(q.kappa1 == 0.0);
  CHECK(q.Lambda2 == C(2.0));
}

TEST_CASE("malformed parameter files are rejected") {
  auto kind = [](const char* text) {
    try {
      io::params_from_json(json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::RankDeficiency;
  };
  CHECK(kind(R"({"Kerr": 1})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"Lambda1": 0.3})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"Lambda1": [0.3]})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"Lambda1": ["a", 1]})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"K": "1"})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"allow_negative_loss": 1})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"([1, 2])") == ErrorKind::InvalidConfig);
  CHECK_THROWS_AS(io::int_from_json(json(2.5), "n"), Error);
}

TEST_CASE("derived constants serialize with nulls for undefined values") {
  PhysicalParams p;
  p.Lambda2 = 4;
  p.kappa1 = 0.01;
  p.Delta = 5;
  DerivedParams d = derive(p);
  json j = io::to_json(d);
  CHECK(j["lambda2"] == json::array({8.0, 0.0}));
  d.r1 = C(std::nan(""), 0);
  CHECK(io::to_json(d)["r1"].is_null());
  CHECK(io::to_json(classify(derive(p)))["name"] == "Generic");
  p.Lambda1 = {0.01, -10};
  const json c = io::to_json(classify(derive(p)));
  CHECK(c["name"] == "Blockade(0)");
  CHECK(c["n1"] == 0);
  CHECK_FALSE(c.contains("n2"));
}

TEST_CASE("numbers print with full precision") {
  CHECK(io::fmt(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::fmt(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(io::fmt(2.0) == "2");
}

TEST_CASE("CSV writer layout") {
  const auto path = std::filesystem::temp_directory_path() / "kerrcqa_io_test.csv";
  {
    io::CsvWriter w(path.string(), json{{"command", "scan"}}, {"a", "z_re", "z_im", "label"});
    w.add(std::size_t{3}).add(C(0.5, -1.0)).add(std::string("x,\"y\""));
    w.end_row();
    w.add(1).add(C(0.0)).add(std::string("plain"));
    w.end_row();
  }
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  CHECK(ss.str() ==
        "# config: {\"command\":\"scan\"}\n"
        "a,z_re,z_im,label\n"
        "3,0.5,-1,\"x,\"\"y\"\"\"\n"
        "1,0,0,plain\n");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(io::CsvWriter("/nonexistent/dir/x.csv", json{}, {"a"}), Error);
}
