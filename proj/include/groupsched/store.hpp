/*
 * Copyright (C) 2026 The groupsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef GROUPSCHED__STORE_HPP
#define GROUPSCHED__STORE_HPP

#include <groupsched/json_codec.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace groupsched {

/// One JSON document per poll under a directory. Writes go to a temporary
/// file that is fsync'ed and renamed over the old document, so a reader only
/// ever sees a complete previous or complete new version.
class PollStore
{
public:
  explicit PollStore(std::filesystem::path root)
  : _root(std::move(root))
  {
    std::filesystem::create_directories(_root);
  }

  const std::filesystem::path& root() const { return _root; }

  void save(const PollState& poll) const
  {
    const auto target = path_for(poll.id);
    const auto tmp = target.string() + ".tmp";
    const std::string body = poll_to_json(poll).dump(2) + "\n";

    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
      throw std::system_error(errno, std::generic_category(), "open " + tmp);
    std::size_t written = 0;
    while (written < body.size())
    {
      const auto n = ::write(fd, body.data() + written, body.size() - written);
      if (n < 0)
      {
        if (errno == EINTR)
          continue;
        const int err = errno;
        ::close(fd);
        throw std::system_error(err, std::generic_category(), "write " + tmp);
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0)
    {
      const int err = errno;
      ::close(fd);
      throw std::system_error(err, std::generic_category(), "fsync " + tmp);
    }
    ::close(fd);
    std::filesystem::rename(tmp, target);

    const int dir = ::open(_root.c_str(), O_RDONLY | O_DIRECTORY);
    if (dir >= 0)
    {
      ::fsync(dir);
      ::close(dir);
    }
  }

  /// nullopt when no document exists; DecodeError when it is corrupt.
  std::optional<PollState> load(const std::string& id) const
  {
    if (!valid_id(id))
      return std::nullopt;
    std::ifstream in(path_for(id));
    if (!in)
      return std::nullopt;
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded())
      throw DecodeError("poll document " + id + " is not valid JSON");
    auto poll = poll_from_json(doc);
    if (poll.id != id)
      throw DecodeError("poll document " + id + " carries id " + poll.id);
    return poll;
  }

  std::vector<std::string> ids() const
  {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(_root))
      if (entry.path().extension() == ".json")
        out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// URL-safe ids only: letters, digits, '-' and '_'.
  static bool valid_id(const std::string& id)
  {
    if (id.empty() || id.size() > 64)
      return false;
    for (char c : id)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
        return false;
    return true;
  }

private:
  std::filesystem::path path_for(const std::string& id) const
  {
    if (!valid_id(id))
      throw std::invalid_argument("invalid poll id");
    return _root / (id + ".json");
  }

  std::filesystem::path _root;
};

} // namespace groupsched

#endif // GROUPSCHED__STORE_HPP
