#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "choose4/http_server.hpp"

using namespace choose4;
using nlohmann::json;

TEST(Http, EndToEnd) {
  HttpServer server;
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);
  auto health = cli.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto solved = cli.Post("/v1/solve", R"({"inputs": {"d": 89, "theta0": 1.3, "theta1": 0.8, "beta": 0.1}})",
                         "application/json");
  ASSERT_TRUE(solved);
  EXPECT_EQ(solved->status, 200);
  EXPECT_EQ(solved->get_header_value("Content-Type").rfind("application/json", 0), 0u);
  EXPECT_NEAR(json::parse(solved->body).at("resolved").at("alpha").get<double>(), 0.157, 5e-4);

  auto bad = cli.Post("/v1/solve", R"({"inputs": {"d": 89}})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body).at("code"), "Arity");

  auto missing = cli.Get("/v1/unknown");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  t.join();
  EXPECT_FALSE(server.running());
}
