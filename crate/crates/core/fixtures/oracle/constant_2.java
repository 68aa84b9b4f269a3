import java.util.*;

public class Main {
    public static void main(String[] args) {
        Scanner sc = new Scanner(System.in);
        long a = sc.nextLong();
        long b = sc.nextLong();
        long days = 0;
        for (int i = 0; i < 7; i++) {
            days += i;
        }
        System.out.println(Math.max(a, b) * days);
    }
}
