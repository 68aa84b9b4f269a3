import java.util.*;

public class Main {
    static long power(long b, long e, long m) {
        if (e == 0) return 1;
        long half = power(b, e / 2, m);
        long r = half * half % m;
        if (e % 2 == 1) r = r * b % m;
        return r;
    }

    public static void main(String[] args) {
        Scanner sc = new Scanner(System.in);
        long b = sc.nextLong();
        long e = sc.nextLong();
        System.out.println(power(b, e, 1000000007L));
    }
}
