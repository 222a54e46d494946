int nondet();
int main() {
  int n = nondet();
  int c = 0;
  while (n > 0) {
    n--;
    c += 2;
  }
  assert(c >= 0);
  return c;
}
