#  Copyright 2026 The lyapcomp Authors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Lookup of data files shipped inside the package (matrices, vectors)."""

from importlib import resources
import pathlib


def _split(name: str) -> tuple[str, str]:
  package, filename = name.rsplit("/", 1)
  return package.replace("/", "."), filename


def GetResourcePath(name: str) -> pathlib.Path:
  """Returns a filesystem path of a packaged data file.

  Packages are installed as regular directories, so the traversable is a real
  path and stays valid after the call.

  Args:
    name: Slash separated resource name, starting with the package.

  Returns:
    Path of the resource.

  Raises:
    FileNotFoundError: If the resource does not exist.
  """
  package, filename = _split(name)
  path = pathlib.Path(str(resources.files(package).joinpath(filename)))
  if not path.is_file():
    raise FileNotFoundError(f"Resource {name} not found")
  return path
