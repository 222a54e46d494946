int nondet();
int main() {
  int x = nondet();
  if (x == 2) {
    assert(0);
  }
  x = x + 1;
  return 0;
}
